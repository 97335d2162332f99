#pragma once

// Sparse inverse spectral density estimation for conditional independence
// graphs of multivariate time series.

#include "specgraph/common.hpp"
#include "specgraph/spectral.hpp"
#include "specgraph/penalty.hpp"
#include "specgraph/admm.hpp"
#include "specgraph/select.hpp"
#include "specgraph/bench.hpp"
#include "specgraph/io.hpp"
