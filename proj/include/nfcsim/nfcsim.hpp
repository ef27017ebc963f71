#pragma once

// Umbrella header: event clock, link layer, role-switch protocols, chunked
// transfer, readiness calibration, workloads, offload runtime, scenarios.

#include "nfcsim/apdu.hpp"
#include "nfcsim/clock.hpp"
#include "nfcsim/errors.hpp"
#include "nfcsim/link.hpp"
#include "nfcsim/offload.hpp"
#include "nfcsim/protocols.hpp"
#include "nfcsim/readiness.hpp"
#include "nfcsim/rng.hpp"
#include "nfcsim/rsa.hpp"
#include "nfcsim/scenario.hpp"
#include "nfcsim/storage.hpp"
#include "nfcsim/time.hpp"
#include "nfcsim/timing.hpp"
#include "nfcsim/trace.hpp"
#include "nfcsim/variant.hpp"
#include "nfcsim/workloads.hpp"
