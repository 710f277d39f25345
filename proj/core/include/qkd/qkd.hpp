#pragma once

#include "qkd/alphabet.hpp"
#include "qkd/bits.hpp"
#include "qkd/channel.hpp"
#include "qkd/distill.hpp"
#include "qkd/error.hpp"
#include "qkd/eve.hpp"
#include "qkd/otp.hpp"
#include "qkd/protocol.hpp"
#include "qkd/quantum.hpp"
#include "qkd/rng.hpp"
