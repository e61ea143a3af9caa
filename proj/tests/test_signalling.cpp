#include "tollgate/signalling.hpp"

#include <gtest/gtest.h>

namespace tollgate {
namespace {

SipMessage invite() {
    SipMessage m;
    m.start = SipRequest{"INVITE", "sip:b@mg-b.example"};
    m.headers = {
        {"Via", "SIP/2.0/UDP mg-a.example;branch=z9hG4bK776"},
        {"Max-Forwards", "70"},
        {"From", "<sip:a@mg-a.example>;tag=1928301774"},
        {"To", "<sip:b@mg-b.example>"},
        {"Call-ID", "a84b4c76e66710@mg-a.example"},
        {"CSeq", "314159 INVITE"},
        {"Contact", "<sip:a@mg-a.example>"},
    };
    std::string body = "v=0\r\no=a 0 0 IN IP4 mg-a.example\r\n";
    m.body.assign(body.begin(), body.end());
    return m;
}

SipMessage ringing() {
    SipMessage m;
    m.start = SipResponse{183, "Session Progress"};
    m.headers = {
        {"Via", "SIP/2.0/UDP mg-a.example;branch=z9hG4bK776"},
        {"From", "<sip:a@mg-a.example>;tag=1928301774"},
        {"To", "<sip:b@mg-b.example>;tag=8321234356"},
        {"Call-ID", "a84b4c76e66710@mg-a.example"},
        {"CSeq", "314159 INVITE"},
    };
    return m;
}

// ── SIP wire format ──────────────────────────────────────────────────────────

TEST(SipWire, RequestRoundTrips) {
    SipMessage m = invite();
    SipMessage back = parse_sip(serialize_sip(m));
    EXPECT_EQ(back, m);
    EXPECT_TRUE(back.is_request());
    EXPECT_EQ(back.request().method, "INVITE");
    EXPECT_EQ(back.request().uri, "sip:b@mg-b.example");
}

TEST(SipWire, ResponseRoundTrips) {
    SipMessage m = ringing();
    SipMessage back = parse_sip(serialize_sip(m));
    EXPECT_EQ(back, m);
    ASSERT_FALSE(back.is_request());
    EXPECT_EQ(back.response().status, 183);
    EXPECT_EQ(back.response().reason, "Session Progress");
}

TEST(SipWire, HeaderLookupIsCaseInsensitive) {
    SipMessage m = invite();
    EXPECT_EQ(m.header("call-id"), m.header("Call-ID"));
    EXPECT_EQ(m.header("CSEQ"), m.header("CSeq"));
    EXPECT_FALSE(m.header("Route"));
}

TEST(SipWire, HeaderValuesAreTrimmed) {
    std::string text =
        "BYE sip:b@mg-b.example SIP/2.0\r\n"
        "From:   <sip:a@mg-a.example>;tag=1 \r\n"
        "To: <sip:b@mg-b.example>\r\n"
        "Call-ID: x@y\r\n"
        "CSeq: 2 BYE\r\n"
        "\r\n";
    SipMessage m = parse_sip(ByteVec(text.begin(), text.end()));
    EXPECT_EQ(m.header("From"), "<sip:a@mg-a.example>;tag=1");
}

TEST(SipWire, ParseFaults) {
    auto wire = [](std::string s) { return ByteVec(s.begin(), s.end()); };
    EXPECT_THROW(parse_sip(wire("INVITE sip:x SIP/2.0\r\nFrom: a\r\n")), SignallingError);
    EXPECT_THROW(parse_sip(wire("\r\n\r\n")), SignallingError);
    EXPECT_THROW(parse_sip(wire("SIP/2.0 18x Ringing\r\nFrom: a\r\nTo: b\r\nCall-ID: c\r\n"
                                "CSeq: 1 X\r\n\r\n")),
                 SignallingError);
    EXPECT_THROW(parse_sip(wire("INVITE sip:x HTTP/1.1\r\nFrom: a\r\nTo: b\r\nCall-ID: c\r\n"
                                "CSeq: 1 X\r\n\r\n")),
                 SignallingError);
    EXPECT_THROW(parse_sip(wire("INVITE sip:x SIP/2.0\r\nbroken header line\r\nFrom: a\r\n"
                                "To: b\r\nCall-ID: c\r\nCSeq: 1 X\r\n\r\n")),
                 SignallingError);
    // Each of the four identity headers is mandatory.
    for (const char* drop : {"From", "To", "Call-ID", "CSeq"}) {
        SipMessage m = invite();
        std::erase_if(m.headers, [&](const auto& h) { return h.first == drop; });
        EXPECT_THROW(parse_sip(serialize_sip(m)), SignallingError) << drop;
    }
}

// ── SIP canonical form ───────────────────────────────────────────────────────

TEST(SipCanonical, PinnedLayout) {
    SipMessage m;
    m.start = SipRequest{"BYE", "sip:b@mg-b.example"};
    m.headers = {{"From", "fa"}, {"To", "tb"}, {"Call-ID", "cid"}, {"CSeq", "2 BYE"}};
    m.body = {'x', 'y'};
    std::string expect = "BYE sip:b@mg-b.example SIP/2.0\nfa\ntb\ncid\n2 BYE\nxy";
    EXPECT_EQ(canonical_bytes(m), ByteVec(expect.begin(), expect.end()));
}

TEST(SipCanonical, InvariantUnderProxyMutations) {
    SipMessage m = invite();
    Digest base = hash_bytes(canonical_bytes(m));

    SipMessage hopped = m;
    for (auto& [n, v] : hopped.headers)
        if (n == "Via") v += ";received=198.51.100.7";
    hopped.headers.insert(hopped.headers.begin(), {"Record-Route", "<sip:proxy.example;lr>"});
    for (auto& [n, v] : hopped.headers)
        if (n == "Max-Forwards") v = "69";
    for (auto& [n, v] : hopped.headers)
        if (n == "Contact") v = "<sip:a@198.51.100.2>";
    EXPECT_EQ(hash_bytes(canonical_bytes(hopped)), base);
}

TEST(SipCanonical, SensitiveToIdentityAndContent) {
    SipMessage m = invite();
    Digest base = hash_bytes(canonical_bytes(m));

    for (const char* target : {"From", "To", "Call-ID", "CSeq"}) {
        SipMessage forged = m;
        for (auto& [n, v] : forged.headers)
            if (n == target) v += "x";
        EXPECT_NE(hash_bytes(canonical_bytes(forged)), base) << target;
    }
    SipMessage forged_body = m;
    forged_body.body.push_back('!');
    EXPECT_NE(hash_bytes(canonical_bytes(forged_body)), base);

    SipMessage forged_start = m;
    forged_start.start = SipRequest{"INVITE", "sip:mallory@mg-b.example"};
    EXPECT_NE(hash_bytes(canonical_bytes(forged_start)), base);
}

// ── ISUP wire format ─────────────────────────────────────────────────────────

TEST(IsupWire, AllTypesRoundTrip) {
    int cic = 1;
    for (IsupType t :
         {IsupType::Iam, IsupType::Acm, IsupType::Anm, IsupType::Rel, IsupType::Rlc}) {
        IsupMessage m;
        m.cic = static_cast<uint16_t>(cic);
        m.type = t;
        m.params = ByteVec{static_cast<uint8_t>(cic), 0x80, 0x90};
        EXPECT_EQ(parse_isup(serialize_isup(m)), m);
        cic = (cic * 7 + 13) & 0x0FFF;  // stay inside the 12-bit circuit space
    }
}

TEST(IsupWire, PinnedLayout) {
    IsupMessage m;
    m.cic = 0x0ABC;
    m.type = IsupType::Rel;
    m.params = {0x02, 0x00, 0x10};
    ByteVec expect{0xBC, 0x0A, 0x0C, 0x00, 0x03, 0x02, 0x00, 0x10};
    EXPECT_EQ(serialize_isup(m), expect);
    EXPECT_EQ(canonical_bytes(m), expect);
}

TEST(IsupWire, Faults) {
    IsupMessage m;
    m.cic = 0x1000;
    EXPECT_THROW(serialize_isup(m), SignallingError);

    EXPECT_THROW(parse_isup(ByteVec{0x01, 0x00, 0x01, 0x00}), SignallingError);  // truncated
    EXPECT_THROW(parse_isup(ByteVec{0x01, 0x80, 0x01, 0x00, 0x00}), SignallingError);  // rsvd
    EXPECT_THROW(parse_isup(ByteVec{0x01, 0x00, 0x42, 0x00, 0x00}), SignallingError);  // type
    EXPECT_THROW(parse_isup(ByteVec{0x01, 0x00, 0x01, 0x00, 0x02, 0xAA}), SignallingError);
}

TEST(IsupWire, EveryAcceptedByteMutationMovesTheCanonicalForm) {
    IsupMessage m;
    m.cic = 0x123;
    m.type = IsupType::Iam;
    m.params = {0x0A, 0x0B};
    ByteVec wire = serialize_isup(m);
    for (size_t i = 0; i < wire.size(); ++i) {
        for (uint8_t flip : {uint8_t{0x01}, uint8_t{0x80}}) {
            ByteVec mutated = wire;
            mutated[i] ^= flip;
            try {
                IsupMessage back = parse_isup(mutated);
                EXPECT_NE(canonical_bytes(back), canonical_bytes(m))
                    << "byte " << i << " flip " << int(flip);
            } catch (const SignallingError&) {
                // Rejected outright: equally detected.
            } catch (const std::out_of_range&) {
                // Length-field mutations may leave the buffer short.
            }
        }
    }
}

// ── SIP-T bridging ───────────────────────────────────────────────────────────

TEST(SipT, AttachAndExtract) {
    SipMessage m = invite();
    m.body.clear();
    IsupMessage iam;
    iam.cic = 5;
    iam.type = IsupType::Iam;
    iam.params = {0x01, 0x02, 0x03, 0x04};
    attach_isup(m, iam);

    EXPECT_EQ(m.header("Content-Type"), std::string(kIsupContentType));
    EXPECT_EQ(m.header("Content-Length"), std::to_string(m.body.size()));
    auto back = extract_isup(m);
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, iam);

    // Survives the wire.
    auto rewired = extract_isup(parse_sip(serialize_sip(m)));
    ASSERT_TRUE(rewired.has_value());
    EXPECT_EQ(*rewired, iam);
}

TEST(SipT, PlainSdpBodyCarriesNoIsup) {
    EXPECT_FALSE(extract_isup(invite()).has_value());
}

TEST(SipT, DeclaredButBrokenBodyFaults) {
    SipMessage m = invite();
    IsupMessage iam;
    iam.type = IsupType::Iam;
    attach_isup(m, iam);

    SipMessage bad_hex = m;
    bad_hex.body.back() = 'g';
    EXPECT_THROW(extract_isup(bad_hex), std::invalid_argument);

    SipMessage truncated = m;
    truncated.body.resize(truncated.body.size() - 2);
    EXPECT_THROW(extract_isup(truncated), SignallingError);
}

// ── gateway control surface ──────────────────────────────────────────────────

TEST(Megaco, ReplyMapsDecisionToAction) {
    MegacoNotify n{"rtp/17", ObservedEvent::TokenFail, 9};
    MegacoReply keep = megaco_reply(n, MgcDecision::Continue);
    EXPECT_EQ(keep.termination_id, "rtp/17");
    EXPECT_EQ(keep.action, MegacoAction::Continue);
    MegacoReply drop = megaco_reply(n, MgcDecision::Teardown);
    EXPECT_EQ(drop.termination_id, "rtp/17");
    EXPECT_EQ(drop.action, MegacoAction::Subtract);
}

TEST(Megaco, StringForms) {
    EXPECT_STREQ(to_string(ObservedEvent::TokenOk), "token_ok");
    EXPECT_STREQ(to_string(ObservedEvent::TokenFail), "token_fail");
    EXPECT_STREQ(to_string(MgcDecision::Continue), "continue");
    EXPECT_STREQ(to_string(MgcDecision::Teardown), "teardown");
    EXPECT_STREQ(to_string(MegacoAction::Subtract), "subtract");
}

}  // namespace
}  // namespace tollgate
