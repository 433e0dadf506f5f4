#pragma once

#include "clockinterf/double_word.hpp"
#include "clockinterf/errors.hpp"
#include "clockinterf/fringe.hpp"
#include "clockinterf/noise.hpp"
#include "clockinterf/qutrit.hpp"
#include "clockinterf/redshift.hpp"
#include "clockinterf/sequence.hpp"
#include "clockinterf/stacking.hpp"

namespace clockinterf {
inline constexpr const char* kVersion = "0.1.0";
}
