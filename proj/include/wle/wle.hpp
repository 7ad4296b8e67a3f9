#pragma once

#include "wle/error.hpp"
#include "wle/rational.hpp"
#include "wle/core.hpp"
#include "wle/algorithms.hpp"
#include "wle/adversary.hpp"
#include "wle/analyzer.hpp"
#include "wle/poise.hpp"
#include "wle/analysis.hpp"
#include "wle/checker.hpp"
#include "wle/bench.hpp"

namespace wle {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace wle
