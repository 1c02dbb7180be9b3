// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "adaflow/aftn.hpp"
#include "adaflow/attention.hpp"
#include "adaflow/cost.hpp"
#include "adaflow/denoiser.hpp"
#include "adaflow/error.hpp"
#include "adaflow/heatmap_cache.hpp"
#include "adaflow/keyframes.hpp"
#include "adaflow/metrics.hpp"
#include "adaflow/parallel.hpp"
#include "adaflow/partition.hpp"
#include "adaflow/pipeline.hpp"
#include "adaflow/propagation.hpp"
#include "adaflow/similarity.hpp"
#include "adaflow/splitmix.hpp"
#include "adaflow/synth.hpp"
#include "adaflow/tensor.hpp"
