#pragma once

// Umbrella header: adaptive residual caching for a deterministic toy video
// diffusion transformer, plus the experiment harness around it.

#include "cache.hpp"
#include "codebook.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "harness.hpp"
#include "io.hpp"
#include "model.hpp"
#include "motion.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "sampler.hpp"
#include "tensor.hpp"
