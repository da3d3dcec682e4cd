// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <optional>
#include <vector>

#include "sgpip/types.hpp"

namespace sgpip {

// Maximum-ratio transmission H / ||H||_F.
Precoder mrt(const CMat& H);

// normalize(H (H^H H + alpha I)^{-1}); alpha = 0 requires full column rank.
Precoder rzf(const CMat& H, double alpha);

// normalize(H (H^H H)^{-1}).
Precoder zf(const CMat& H);

// Power levels p_k = max(0, mu - 1/g_k) summing to total_power.
RVec water_filling(const RVec& gains, double total_power);

// Zero-forcing dirty-paper-coding sum rate. With H = Q R the users, encoded
// in `order` (natural order by default), see gains |R_kk|^2:
//   sum_k log2(1 + p_k |R_kk|^2 / sigma2)
// with p_k = P / K or water filling over |R_kk|^2 / sigma2.
double zf_dpc_rate(const CMat& H, double P, double sigma2, bool waterfill,
                   const std::optional<std::vector<int>>& order = std::nullopt);

}  // namespace sgpip
