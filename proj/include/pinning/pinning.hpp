#pragma once

#include "pinning/dynamics.hpp"
#include "pinning/empirical.hpp"
#include "pinning/errors.hpp"
#include "pinning/format.hpp"
#include "pinning/hedge_series.hpp"
#include "pinning/model.hpp"
#include "pinning/statistics.hpp"
#include "pinning/stochastic.hpp"

namespace pinning {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pinning
