#include "tollgate/gateway.hpp"

#include <gtest/gtest.h>

#include <regex>

namespace tollgate {
namespace {

SipMessage sip_request(const std::string& method, const std::string& cseq_num) {
    SipMessage m;
    m.start = SipRequest{method, "sip:b@mg-b.example"};
    m.headers = {
        {"Via", "SIP/2.0/UDP mg-a.example;branch=z9hG4bK1"},
        {"From", "<sip:a@mg-a.example>;tag=1"},
        {"To", "<sip:b@mg-b.example>;tag=2"},
        {"Call-ID", "gw-test@mg-a.example"},
        {"CSeq", cseq_num + " " + method},
    };
    return m;
}

GatewayConfig config_for(uint32_t local, uint32_t peer, uint64_t seed) {
    GatewayConfig cfg;
    cfg.local_id = local;
    cfg.peer_id = peer;
    cfg.pass = to_bytes("shared-secret");
    cfg.seed = seed;
    cfg.termination_id = local == 0xA1 ? "tg-a" : "tg-b";
    return cfg;
}

struct GatewayPair {
    MediaGateway a;
    MediaGateway b;

    GatewayPair() : a(config_for(0xA1, 0xB2, 100)), b(config_for(0xB2, 0xA1, 200)) {}

    void setup_call() {
        SipMessage inv = sip_request("INVITE", "1");
        a.hash_signalling(inv);
        b.hash_signalling(inv);
        a.activate();
        b.activate();
    }
};

// ── level of trust ───────────────────────────────────────────────────────────

TEST(Lot, DefaultsAndBounds) {
    LotState lot;
    EXPECT_EQ(lot.level(), 3);
    EXPECT_EQ(lot.policy().max, 10);
    EXPECT_EQ(lot.policy().reward, 1);
    EXPECT_EQ(lot.policy().penalty, 2);
}

TEST(Lot, PersistentTamperingExhaustsTrustInTwoWindows) {
    LotState lot;
    EXPECT_EQ(lot.apply(VerifyResult::Mismatch), 1);
    EXPECT_EQ(lot.apply(VerifyResult::Mismatch), 0);
    EXPECT_EQ(lot.apply(VerifyResult::Mismatch), 0);  // clamped
}

TEST(Lot, CleanCallPinsAtMaxFromTheSeventhWindow) {
    LotState lot;
    for (int i = 0; i < 20; ++i) {
        int level = lot.apply(VerifyResult::Match);
        int expect = std::min(3 + i + 1, 10);
        EXPECT_EQ(level, expect) << "window " << i;
        if (i >= 6) {
            EXPECT_EQ(level, 10);
        }
    }
}

TEST(Lot, SingleGlitchRecovers) {
    LotState lot;
    lot.apply(VerifyResult::Match);     // 4
    lot.apply(VerifyResult::Mismatch);  // 2
    EXPECT_EQ(lot.level(), 2);
    EXPECT_EQ(mgc_decide(lot.level()), MgcDecision::Continue);
    lot.apply(VerifyResult::Match);
    lot.apply(VerifyResult::Match);
    EXPECT_EQ(lot.level(), 4);
}

TEST(Lot, MalformedPoliciesFault) {
    EXPECT_THROW(LotState(LotPolicy{-1, 10, 1, 2}), std::invalid_argument);
    EXPECT_THROW(LotState(LotPolicy{3, 0, 1, 2}), std::invalid_argument);
    EXPECT_THROW(LotState(LotPolicy{11, 10, 1, 2}), std::invalid_argument);
    EXPECT_THROW(LotState(LotPolicy{3, 10, -1, 2}), std::invalid_argument);
}

TEST(Lot, DecisionOnlyAtZero) {
    EXPECT_EQ(mgc_decide(0), MgcDecision::Teardown);
    EXPECT_EQ(mgc_decide(1), MgcDecision::Continue);
    EXPECT_EQ(mgc_decide(10), MgcDecision::Continue);
}

// ── call phases ──────────────────────────────────────────────────────────────

TEST(Phases, MediaRequiresActiveCall) {
    MediaGateway gw(config_for(0xA1, 0xB2, 1));
    EXPECT_EQ(gw.phase(), CallPhase::Setup);
    SpeechSynth synth(1);
    EXPECT_THROW(gw.send_window(synth.next_window()), std::logic_error);
    EXPECT_THROW(gw.receive_window({}), std::logic_error);
    gw.hash_signalling(sip_request("INVITE", "1"));
    gw.activate();
    EXPECT_EQ(gw.phase(), CallPhase::Active);
    EXPECT_THROW(gw.activate(), std::logic_error);
}

TEST(Phases, SendRequiresHashedSignalling) {
    MediaGateway gw(config_for(0xA1, 0xB2, 1));
    gw.activate();
    SpeechSynth synth(1);
    EXPECT_THROW(gw.send_window(synth.next_window()), std::logic_error);
}

TEST(Phases, ReleaseClassMessagesStartTeardown) {
    MediaGateway gw(config_for(0xA1, 0xB2, 1));
    gw.hash_signalling(sip_request("INVITE", "1"));
    gw.activate();
    gw.hash_signalling(sip_request("BYE", "2"));
    EXPECT_EQ(gw.phase(), CallPhase::TeardownPending);
    gw.complete_teardown();
    EXPECT_EQ(gw.phase(), CallPhase::Terminated);
    gw.complete_teardown();  // absorbing, no throw
    EXPECT_EQ(gw.phase(), CallPhase::Terminated);
}

TEST(Phases, IsupReleaseAlsoStartsTeardown) {
    MediaGateway gw(config_for(0xA1, 0xB2, 1));
    gw.hash_signalling(sip_request("INVITE", "1"));
    gw.activate();
    SipMessage info = sip_request("INFO", "2");
    IsupMessage rel;
    rel.cic = 5;
    rel.type = IsupType::Rel;
    attach_isup(info, rel);
    gw.hash_signalling(info);
    EXPECT_EQ(gw.phase(), CallPhase::TeardownPending);
}

TEST(Phases, TeardownDuringSetupDoesNotArm) {
    MediaGateway gw(config_for(0xA1, 0xB2, 1));
    gw.hash_signalling(sip_request("BYE", "1"));
    EXPECT_EQ(gw.phase(), CallPhase::Setup);
    EXPECT_THROW(gw.complete_teardown(), std::logic_error);
}

TEST(Phases, TerminatedDropsLateSignallingWithWarning) {
    MediaGateway gw(config_for(0xA1, 0xB2, 1));
    gw.hash_signalling(sip_request("INVITE", "1"));
    gw.activate();
    gw.hash_signalling(sip_request("BYE", "2"));
    gw.complete_teardown();
    size_t sb_before = gw.signalling().size();
    EXPECT_FALSE(gw.hash_signalling(sip_request("OPTIONS", "3")).has_value());
    EXPECT_EQ(gw.signalling().size(), sb_before);
    ASSERT_FALSE(gw.event_log().empty());
    EXPECT_EQ(gw.event_log().back(), "warning: signalling after termination dropped");
}

// ── clean media path ─────────────────────────────────────────────────────────

TEST(MediaPath, CleanWindowVerifies) {
    GatewayPair gws;
    gws.setup_call();
    SpeechSynth synth(5);
    SentWindow sent = gws.a.send_window(synth.next_window());
    ASSERT_EQ(sent.packets.size(), kFramesPerWindow);
    ReceivedWindow rec = gws.b.receive_window(sent.packets);

    EXPECT_EQ(rec.verdict.result, VerifyResult::Match);
    EXPECT_TRUE(rec.verdict.structural_ok);
    EXPECT_TRUE(rec.verdict.token_match);
    EXPECT_TRUE(rec.verdict.ts_ok);
    EXPECT_FALSE(rec.verdict.post_auth_due);
    EXPECT_TRUE(rec.verdict.post_auth_match);
    EXPECT_DOUBLE_EQ(rec.verdict.survival, 1.0);
    EXPECT_EQ(rec.verdict.lot_after, 4);
    EXPECT_EQ(rec.verdict.decision, MgcDecision::Continue);
    EXPECT_EQ(rec.verdict.notify, (MegacoNotify{"tg-b", ObservedEvent::TokenOk, 0}));
    EXPECT_FALSE(rec.verdict.rollback);
    EXPECT_FALSE(rec.verdict.teardown_confirmed);
}

TEST(MediaPath, PostAuthCadenceAndStats) {
    GatewayPair gws;
    gws.setup_call();
    SpeechSynth synth(6);
    std::vector<uint32_t> due_windows;
    for (uint32_t i = 0; i < 10; ++i) {
        ReceivedWindow rec = gws.b.receive_window(gws.a.send_window(synth.next_window()).packets);
        EXPECT_EQ(rec.verdict.result, VerifyResult::Match) << "window " << i;
        EXPECT_TRUE(rec.verdict.post_auth_match) << "window " << i;
        if (rec.verdict.post_auth_due) due_windows.push_back(i);
    }
    // Every fourth PDU is a post-auth digest; a due window carries two PDUs,
    // so due windows land every three windows after the ring first fills.
    EXPECT_EQ(due_windows, (std::vector<uint32_t>{3, 6, 9}));

    const CovertStats& sent = gws.a.covert_stats();
    EXPECT_EQ(sent.pdus_sent, 13u);  // 10 tokens + 3 post-auth
    EXPECT_EQ(sent.post_auth_sent, 3u);
    const CovertStats& got = gws.b.covert_stats();
    EXPECT_EQ(got.pdus_received, 13u);
    EXPECT_EQ(got.post_auth_checked, 3u);
    EXPECT_EQ(got.post_auth_failures, 0u);
    EXPECT_EQ(got.structural_faults, 0u);
}

TEST(MediaPath, FreshChallengePerWindow) {
    GatewayPair gws;
    gws.setup_call();
    SpeechSynth synth(7);
    WatermarkLayer layer{LayerId::Gateway, kDefaultDelta};
    SentWindow w0 = gws.a.send_window(synth.next_window());
    SentWindow w1 = gws.a.send_window(synth.next_window());
    Token t0 = Token::parse(bits_to_bytes(extract_bits(w0.window, layer, kTokenPduBits)));
    Token t1 = Token::parse(bits_to_bytes(extract_bits(w1.window, layer, kTokenPduBits)));
    EXPECT_NE(t0.r, t1.r);
    EXPECT_EQ(t0.ts, 0u);
    EXPECT_EQ(t1.ts, 1u);
}

TEST(MediaPath, PacketFieldsFollowTheStockStack) {
    GatewayPair gws;
    gws.setup_call();
    SpeechSynth synth(8);
    SentWindow sent = gws.a.send_window(synth.next_window());
    for (size_t j = 0; j < sent.packets.size(); ++j) {
        const SimPacket& p = sent.packets[j];
        EXPECT_EQ(p.rtp_seq, j);
        EXPECT_EQ(p.rtp_timestamp, j * kFrameSamples);
        EXPECT_EQ(p.payload.size(), kFrameSamples);
        if (j > 0) {
            // Only the token slot (packet 0 here) carries covert bits.
            EXPECT_EQ(unpack_header(p), CovertHeader{});
        }
    }
}

TEST(MediaPath, EventLogLinePerWindow) {
    GatewayPair gws;
    gws.setup_call();
    SpeechSynth synth(9);
    gws.b.receive_window(gws.a.send_window(synth.next_window()).packets);
    ASSERT_EQ(gws.b.event_log().size(), 1u);
    std::regex shape(
        "window=0 vf=[0-9a-f]{8} r=[0-9a-f]{8} result=match lot=4 decision=continue");
    EXPECT_TRUE(std::regex_match(gws.b.event_log()[0], shape)) << gws.b.event_log()[0];
}

// ── verification failures ────────────────────────────────────────────────────

TEST(Verification, SignallingDivergenceFailsEveryWindowUntilTeardown) {
    GatewayPair gws;
    SipMessage inv = sip_request("INVITE", "1");
    SipMessage other = sip_request("INVITE", "1");
    other.headers[3].second += ";forged";  // Call-ID differs on B's side
    gws.a.hash_signalling(inv);
    gws.b.hash_signalling(other);
    gws.a.activate();
    gws.b.activate();

    SpeechSynth synth(10);
    ReceivedWindow r0 = gws.b.receive_window(gws.a.send_window(synth.next_window()).packets);
    EXPECT_EQ(r0.verdict.result, VerifyResult::Mismatch);
    EXPECT_EQ(r0.verdict.lot_after, 1);
    EXPECT_EQ(r0.verdict.decision, MgcDecision::Continue);

    ReceivedWindow r1 = gws.b.receive_window(gws.a.send_window(synth.next_window()).packets);
    EXPECT_EQ(r1.verdict.result, VerifyResult::Mismatch);
    EXPECT_EQ(r1.verdict.lot_after, 0);
    EXPECT_EQ(r1.verdict.decision, MgcDecision::Teardown);
    EXPECT_EQ(r1.verdict.notify.event, ObservedEvent::TokenFail);
    EXPECT_EQ(gws.b.phase(), CallPhase::Terminated);

    // Media stops once the controller subtracts the termination.
    EXPECT_THROW(gws.b.receive_window(gws.a.send_window(synth.next_window()).packets),
                 std::logic_error);
}

TEST(Verification, WrongPassFails) {
    GatewayPair gws;
    gws.setup_call();
    MediaGateway outsider(
        [] {
            GatewayConfig cfg = config_for(0xB2, 0xA1, 300);
            cfg.pass = to_bytes("not-the-secret");
            return cfg;
        }());
    outsider.hash_signalling(sip_request("INVITE", "1"));
    outsider.activate();
    SpeechSynth synth(11);
    ReceivedWindow rec = outsider.receive_window(gws.a.send_window(synth.next_window()).packets);
    EXPECT_EQ(rec.verdict.result, VerifyResult::Mismatch);
    EXPECT_FALSE(rec.verdict.token_match);
}

TEST(Verification, SingleCellTamperFlagsExactlyOneWindow) {
    GatewayPair gws;
    gws.setup_call();
    SpeechSynth synth(12);

    SentWindow sent = gws.a.send_window(synth.next_window());
    // Flip the embedded mac region: re-embed the inverse of token bit 64
    // (first mac bit; layer-2 bit k sits at sample 4k+2, sample 258 = frame 1,
    // offset 98).
    std::vector<SimPacket> tampered = sent.packets;
    int16_t cur = ulaw_decode(tampered[1].payload[98]);
    int bit = qim_extract_sample(cur, kDefaultDelta);
    tampered[1].payload[98] =
        ulaw_encode(qim_embed_sample(cur, bit ^ 1, kDefaultDelta));

    ReceivedWindow r0 = gws.b.receive_window(tampered);
    EXPECT_EQ(r0.verdict.result, VerifyResult::Mismatch);
    EXPECT_TRUE(r0.verdict.structural_ok);  // layout intact, content forged
    EXPECT_FALSE(r0.verdict.token_match);
    EXPECT_EQ(r0.verdict.lot_after, 1);

    // The next clean window restores trust: one glitch never kills the call.
    ReceivedWindow r1 = gws.b.receive_window(gws.a.send_window(synth.next_window()).packets);
    EXPECT_EQ(r1.verdict.result, VerifyResult::Match);
    EXPECT_EQ(r1.verdict.lot_after, 2);
    EXPECT_EQ(gws.b.phase(), CallPhase::Active);
}

TEST(Verification, DamagedCovertHeaderIsAStructuralFault) {
    GatewayPair gws;
    gws.setup_call();
    SpeechSynth synth(13);
    SentWindow sent = gws.a.send_window(synth.next_window());
    std::vector<SimPacket> tampered = sent.packets;
    tampered[0].rtp_padding = false;  // kind bit gone: header now nonsense

    ReceivedWindow rec = gws.b.receive_window(tampered);
    EXPECT_FALSE(rec.verdict.structural_ok);
    // Fallback extraction still finds the token at the canonical offset...
    EXPECT_TRUE(rec.verdict.token_match);
    // ...but a window with a damaged announcement is not a verified window.
    EXPECT_EQ(rec.verdict.result, VerifyResult::Mismatch);
    EXPECT_EQ(gws.b.covert_stats().structural_faults, 1u);
}

TEST(Verification, TamperedPostAuthDigestIsCaughtAndHeals) {
    GatewayPair gws;
    gws.setup_call();
    SpeechSynth synth(14);
    for (int i = 0; i < 3; ++i)
        gws.b.receive_window(gws.a.send_window(synth.next_window()).packets);

    // Window 3 leads with the post-auth digest; flip its first bit
    // (layer-2 bit 0 = sample 2 of frame 0).
    SentWindow sent = gws.a.send_window(synth.next_window());
    std::vector<SimPacket> tampered = sent.packets;
    int16_t cur = ulaw_decode(tampered[0].payload[2]);
    int bit = qim_extract_sample(cur, kDefaultDelta);
    tampered[0].payload[2] = ulaw_encode(qim_embed_sample(cur, bit ^ 1, kDefaultDelta));

    ReceivedWindow r3 = gws.b.receive_window(tampered);
    EXPECT_TRUE(r3.verdict.post_auth_due);
    EXPECT_FALSE(r3.verdict.post_auth_match);
    EXPECT_TRUE(r3.verdict.token_match);  // only the digest was altered
    EXPECT_EQ(r3.verdict.result, VerifyResult::Mismatch);
    EXPECT_EQ(gws.b.covert_stats().post_auth_failures, 1u);

    // The forged digest rotates out of the ring before the next due window,
    // so the chain re-synchronizes by itself.
    for (uint32_t i = 4; i <= 6; ++i) {
        ReceivedWindow rec = gws.b.receive_window(gws.a.send_window(synth.next_window()).packets);
        EXPECT_EQ(rec.verdict.result, VerifyResult::Match) << "window " << i;
        if (i == 6) {
            EXPECT_TRUE(rec.verdict.post_auth_due);
            EXPECT_TRUE(rec.verdict.post_auth_match);
        }
    }
}

TEST(Verification, TamperedTokenAlsoTripsTheNextPostAuth) {
    GatewayPair gws;
    gws.setup_call();
    SpeechSynth synth(15);
    for (int i = 0; i < 4; ++i)
        gws.b.receive_window(gws.a.send_window(synth.next_window()).packets);

    // Tamper window 4's token payload (not due; token starts at layer bit 0).
    SentWindow sent = gws.a.send_window(synth.next_window());
    std::vector<SimPacket> tampered = sent.packets;
    int16_t cur = ulaw_decode(tampered[0].payload[2]);
    int bit = qim_extract_sample(cur, kDefaultDelta);
    tampered[0].payload[2] = ulaw_encode(qim_embed_sample(cur, bit ^ 1, kDefaultDelta));

    ReceivedWindow r4 = gws.b.receive_window(tampered);
    EXPECT_FALSE(r4.verdict.token_match);

    ReceivedWindow r5 = gws.b.receive_window(gws.a.send_window(synth.next_window()).packets);
    EXPECT_EQ(r5.verdict.result, VerifyResult::Match);

    // Window 6 is the next post-auth: the receiver's ring still holds the
    // tampered token, so the sender's digest cannot match.
    ReceivedWindow r6 = gws.b.receive_window(gws.a.send_window(synth.next_window()).packets);
    EXPECT_TRUE(r6.verdict.post_auth_due);
    EXPECT_FALSE(r6.verdict.post_auth_match);
    EXPECT_TRUE(r6.verdict.token_match);
    EXPECT_EQ(r6.verdict.result, VerifyResult::Mismatch);
}

TEST(Verification, PacketLossZeroFillsAndFlagsTheWindow) {
    GatewayPair gws;
    gws.setup_call();
    SpeechSynth synth(16);
    SentWindow sent = gws.a.send_window(synth.next_window());
    std::vector<SimPacket> lossy = sent.packets;
    lossy.erase(lossy.begin() + 10, lossy.begin() + 14);  // drop 4 of 50: 92%

    ReceivedWindow rec = gws.b.receive_window(lossy);
    EXPECT_DOUBLE_EQ(rec.verdict.survival, 0.92);
    EXPECT_FALSE(rec.verdict.survival_ok);
    EXPECT_FALSE(rec.verdict.token_match);  // zero-filled frames moved the features
    EXPECT_EQ(rec.verdict.result, VerifyResult::Mismatch);
    for (size_t i = 0; i < kFrameSamples; ++i) EXPECT_EQ(rec.window.frames[10][i], 0);
}

TEST(Verification, ModestLossStaysAboveTheSurvivalBar) {
    GatewayPair gws;
    gws.setup_call();
    SpeechSynth synth(17);
    SentWindow sent = gws.a.send_window(synth.next_window());
    std::vector<SimPacket> lossy = sent.packets;
    lossy.erase(lossy.begin() + 20, lossy.begin() + 22);  // drop 2 of 50: 96%

    ReceivedWindow rec = gws.b.receive_window(lossy);
    EXPECT_DOUBLE_EQ(rec.verdict.survival, 0.96);
    EXPECT_TRUE(rec.verdict.survival_ok);
    // Content checks still fail (the voice itself changed), but trust decays
    // instead of collapsing: LoT absorbs isolated loss.
    EXPECT_EQ(rec.verdict.result, VerifyResult::Mismatch);
    EXPECT_EQ(rec.verdict.lot_after, 1);
    EXPECT_EQ(gws.b.phase(), CallPhase::Active);
}

// ── teardown authentication ──────────────────────────────────────────────────

TEST(Teardown, ForgedReleaseIsRolledBack) {
    GatewayPair gws;
    gws.setup_call();
    SpeechSynth synth(18);
    gws.b.receive_window(gws.a.send_window(synth.next_window()).packets);

    Digest sm_before = gws.b.signalling().current();
    size_t sb_before = gws.b.signalling().size();

    // The attacker injects a BYE that only B sees.
    gws.b.hash_signalling(sip_request("BYE", "9"));
    EXPECT_EQ(gws.b.phase(), CallPhase::TeardownPending);

    // A, which never saw the BYE, keeps stamping windows over the old state.
    ReceivedWindow rec = gws.b.receive_window(gws.a.send_window(synth.next_window()).packets);
    EXPECT_TRUE(rec.verdict.rollback);
    EXPECT_TRUE(rec.verdict.token_match);
    EXPECT_EQ(rec.verdict.result, VerifyResult::Match);
    EXPECT_FALSE(rec.verdict.teardown_confirmed);
    EXPECT_EQ(gws.b.phase(), CallPhase::Active);
    EXPECT_EQ(gws.b.rollback_count(), 1u);

    // The forged message is gone from the buffer, byte for byte.
    EXPECT_EQ(gws.b.signalling().size(), sb_before);
    EXPECT_EQ(gws.b.signalling().current(), sm_before);

    // The call keeps going.
    ReceivedWindow next = gws.b.receive_window(gws.a.send_window(synth.next_window()).packets);
    EXPECT_EQ(next.verdict.result, VerifyResult::Match);
    EXPECT_FALSE(next.verdict.rollback);
}

TEST(Teardown, GenuineReleaseIsConfirmedByTheNextWindow) {
    GatewayPair gws;
    gws.setup_call();
    SpeechSynth synth(19);
    gws.b.receive_window(gws.a.send_window(synth.next_window()).packets);

    SipMessage bye = sip_request("BYE", "2");
    gws.a.hash_signalling(bye);
    gws.b.hash_signalling(bye);
    EXPECT_EQ(gws.a.phase(), CallPhase::TeardownPending);
    EXPECT_EQ(gws.b.phase(), CallPhase::TeardownPending);

    // One more authenticated window flows after the release.
    ReceivedWindow rec = gws.b.receive_window(gws.a.send_window(synth.next_window()).packets);
    EXPECT_EQ(rec.verdict.result, VerifyResult::Match);
    EXPECT_FALSE(rec.verdict.rollback);
    EXPECT_TRUE(rec.verdict.teardown_confirmed);
    EXPECT_TRUE(gws.b.teardown_confirmed());
    EXPECT_EQ(gws.b.phase(), CallPhase::Terminated);
    EXPECT_THROW(gws.b.receive_window({}), std::logic_error);
}

}  // namespace
}  // namespace tollgate
