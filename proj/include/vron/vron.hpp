#pragma once

// Umbrella header.

#include "vron/attest.hpp"
#include "vron/bench.hpp"
#include "vron/bytes.hpp"
#include "vron/camera.hpp"
#include "vron/container.hpp"
#include "vron/crypto.hpp"
#include "vron/defaults.hpp"
#include "vron/error.hpp"
#include "vron/filters.hpp"
#include "vron/fixed.hpp"
#include "vron/provenance.hpp"
#include "vron/scheduler.hpp"
#include "vron/stages.hpp"
#include "vron/tamper.hpp"
#include "vron/transport.hpp"
#include "vron/verifier.hpp"
#include "vron/video.hpp"
#include "vron/wire.hpp"
