#pragma once

// Library umbrella. The CLI layer (p2ptopo/cli.hpp) is not included here.
#include "p2ptopo/error.hpp"
#include "p2ptopo/rng.hpp"
#include "p2ptopo/graph.hpp"
#include "p2ptopo/generators.hpp"
#include "p2ptopo/metrics.hpp"
#include "p2ptopo/spectral.hpp"
#include "p2ptopo/structure.hpp"
#include "p2ptopo/propagation.hpp"
#include "p2ptopo/analysis.hpp"
#include "p2ptopo/io.hpp"
#include "p2ptopo/fixtures.hpp"
