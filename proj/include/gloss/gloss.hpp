#pragma once

// Umbrella header for the whole library.

#include "gloss/error.hpp"
#include "gloss/events.hpp"
#include "gloss/geo.hpp"
#include "gloss/hearsay.hpp"
#include "gloss/nmea.hpp"
#include "gloss/overlay.hpp"
#include "gloss/pipeline.hpp"
#include "gloss/profile_cache.hpp"
#include "gloss/report.hpp"
#include "gloss/scenario.hpp"
#include "gloss/services.hpp"
#include "gloss/simulator.hpp"
#include "gloss/types.hpp"
