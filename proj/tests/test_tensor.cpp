// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "langloop/errors.hpp"
#include "langloop/tensor.hpp"
#include "support.hpp"

using namespace langloop;

TEST_SUITE("tensor") {

TEST_CASE("shape and data invariants") {
  Tensor t({2, 3});
  CHECK(t.numel() == 6);
  CHECK(t.rank() == 2);
  CHECK_THROWS_AS(Tensor({2, 0}), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0}), ShapeError);
  CHECK(Tensor::scalar(3.5).is_scalar());
  CHECK(Tensor::scalar(3.5).scalar_value() == 3.5);
}

TEST_CASE("matmul identity") {
  Rng rng(7);
  const Tensor m = test::random_tensor({3, 4}, rng);
  const Tensor out = matmul(Tensor::identity(3), m);
  CHECK(max_abs_diff(out, m) == 0.0);
}

TEST_CASE("matmul annihilator") {
  Rng rng(8);
  const Tensor m = test::random_tensor({3, 4}, rng);
  const Tensor out = matmul(Tensor::zeros({2, 3}), m);
  CHECK(out.shape() == std::vector<std::size_t>{2, 4});
  for (double v : out.values()) CHECK(v == 0.0);
}

TEST_CASE("matmul matches the triple-loop reference") {
  Rng rng(9);
  const Tensor a = test::random_tensor({4, 5}, rng);
  const Tensor b = test::random_tensor({5, 2}, rng);
  CHECK(max_abs_diff(matmul(a, b), test::matmul_reference(a, b)) < 1e-12);
}

TEST_CASE("matmul rejects mismatched inner dimensions with shapes") {
  const Tensor a({2, 3});
  const Tensor b({4, 2});
  try {
    matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2 x 3]") != std::string::npos);
    CHECK(msg.find("[4 x 2]") != std::string::npos);
  }
}

TEST_CASE("transpose and elementwise helpers") {
  Rng rng(10);
  const Tensor a = test::random_tensor({3, 5}, rng);
  CHECK(max_abs_diff(transpose(transpose(a)), a) == 0.0);
  const Tensor sum = add(a, a);
  CHECK(max_abs_diff(sum, scale(a, 2.0)) == 0.0);
  CHECK(max_abs_diff(sub(sum, a), a) == 0.0);
}

TEST_CASE("check_finite rejects NaN") {
  Tensor t({2});
  t[0] = std::nan("");
  CHECK_THROWS_AS(check_finite(t, "test"), Error);
}

}  // TEST_SUITE
