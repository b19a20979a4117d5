// Copyright 2026 The iontrans Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Truncation checks at N = 20. Labelled slow.

#include <cmath>

#include <gtest/gtest.h>

#include "iontrans/protocol/step2.hpp"

namespace iontrans::protocol {
namespace {

ChainSetup chain20(const ProtocolParams& p) { return make_chain_setup(p, 20, derive_seed(1, 20, 0)); }

TEST(Truncation, CompressedBasisMatchesFullAtTwentyIons) {
  ProtocolParams p;
  const auto setup = chain20(p);
  const auto compressed = run_step2(p, setup);
  p.basis = BasisKind::full;
  const auto full = run_step2(p, setup);
  EXPECT_LT(compressed.dimension, full.dimension);
  EXPECT_NEAR(compressed.fidelity, full.fidelity, 1e-3);
  EXPECT_LT(full.diagnostics.max_norm_drift, 1e-8);
}

TEST(Truncation, RaisedCutoffsAtTwentyIons) {
  ProtocolParams p;
  const auto r = run_step2(p, chain20(p), {1, true});
  ASSERT_TRUE(r.cutoff_delta.has_value());
  EXPECT_LT(*r.cutoff_delta, 1e-3);
}

TEST(Truncation, WiderWindowAtTwentyIons) {
  ProtocolParams p;
  const auto setup = chain20(p);
  const double base = run_step2(p, setup).fidelity;
  p.window_extension = 0.05;
  EXPECT_NEAR(run_step2(p, setup).fidelity, base, 1e-3);
}

}  // namespace
}  // namespace iontrans::protocol
