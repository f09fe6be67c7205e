// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "deshade/tensor.hpp"

namespace deshade {

void log_warn(const std::string& msg) { std::cerr << "[warn] " << msg << "\n"; }

}  // namespace deshade
