#pragma once

// Umbrella header: the full PSTN/IP call-authentication stack.
//
//   bytes/hash/mulaw   primitives: byte wrangling, SHA-256, G.711 companding
//   token              window tokens and the signalling hash buffer
//   audio/watermark    voice windows, QIM layers, voice features
//   covert             header-bit covert channel, PDUs, post-auth chain
//   signalling         SIP / SIP-T / ISUP models and canonical hashing forms
//   gateway            level of trust, call phases, the media gateway
//   channel/adversary  transports and the on-path attacker
//   simulator          endpoints, scenarios, full call runs
//
// tollgate/report.hpp (JSON serialization) is not pulled in here; include it
// directly where reports are produced or parsed.

#include "tollgate/adversary.hpp"
#include "tollgate/audio.hpp"
#include "tollgate/bytes.hpp"
#include "tollgate/channel.hpp"
#include "tollgate/covert.hpp"
#include "tollgate/gateway.hpp"
#include "tollgate/hash.hpp"
#include "tollgate/mulaw.hpp"
#include "tollgate/signalling.hpp"
#include "tollgate/simulator.hpp"
#include "tollgate/token.hpp"
#include "tollgate/watermark.hpp"
#include "tollgate/wav.hpp"
