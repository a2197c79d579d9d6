#pragma once

#include "jdrec/kernels/kernels.hpp"

namespace jdrec::kernels::detail {

// Null when the variant is not compiled into this build.
const KernelTable* avx2_table() noexcept;
const KernelTable* neon_table() noexcept;

}  // namespace jdrec::kernels::detail
