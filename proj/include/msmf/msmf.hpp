#pragma once

#include "msmf/error.hpp"
#include "msmf/estimator.hpp"
#include "msmf/experiment.hpp"
#include "msmf/geometry.hpp"
#include "msmf/kernel.hpp"
#include "msmf/metrics.hpp"
#include "msmf/parallel.hpp"
#include "msmf/point_cloud.hpp"
#include "msmf/population.hpp"
#include "msmf/quadrature.hpp"
#include "msmf/rng.hpp"
#include "msmf/sampling.hpp"
#include "msmf/spatial_index.hpp"
