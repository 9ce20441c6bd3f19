#pragma once

#include "ebpred/csv.hpp"
#include "ebpred/dataset.hpp"
#include "ebpred/errors.hpp"
#include "ebpred/hyperparams.hpp"
#include "ebpred/linalg.hpp"
#include "ebpred/manifest.hpp"
#include "ebpred/math.hpp"
#include "ebpred/posterior.hpp"
#include "ebpred/predictive.hpp"
#include "ebpred/random.hpp"
#include "ebpred/sampler.hpp"
#include "ebpred/simulate.hpp"
