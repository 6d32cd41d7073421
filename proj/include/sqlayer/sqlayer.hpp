#pragma once

// Semi-quantum layered-network protocol simulator.

#include "sqlayer/channel.hpp"
#include "sqlayer/errors.hpp"
#include "sqlayer/harness.hpp"
#include "sqlayer/messaging.hpp"
#include "sqlayer/qudit.hpp"
#include "sqlayer/rng.hpp"
#include "sqlayer/roles.hpp"
#include "sqlayer/serialize.hpp"
#include "sqlayer/sift.hpp"
#include "sqlayer/transport.hpp"
#include "sqlayer/trits.hpp"
#include "sqlayer/types.hpp"
#include "sqlayer/wire.hpp"
