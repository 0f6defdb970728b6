#pragma once

#include "vrc/simd.hpp"

namespace vrc::simd::detail {

const KernelTable* avx2_table();  // nullptr when not compiled in

}  // namespace vrc::simd::detail
