#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "symmatch/autodiff/ops.hpp"
#include "symmatch/autodiff/serialize.hpp"

#include <sstream>

using namespace symmatch;
namespace ad = autodiff;
using oracles::LeafSpec;
using oracles::max_grad_rel_err;

TEST_CASE("matmul: identity, hand fixture") {
  ad::Tape tape;
  ad::Tensor eye = tape.constant(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  ad::Tensor m = tape.constant(3, 2, {1, 2, 3, 4, 5, 6});
  ad::Tensor prod = ad::matmul(eye, m);
  CHECK(prod.value() == m.value());

  // [[1,2,3],[4,5,6]] * [[7,8],[9,10],[11,12]]; products done by hand.
  ad::Tensor a = tape.constant(2, 3, {1, 2, 3, 4, 5, 6});
  ad::Tensor b = tape.constant(3, 2, {7, 8, 9, 10, 11, 12});
  ad::Tensor c = ad::matmul(a, b);
  CHECK(c.value() == std::vector<double>{58, 64, 139, 154});

  ad::Tensor bad = tape.constant(2, 2, {1, 2, 3, 4});
  CHECK_THROWS_AS(ad::matmul(a, bad), std::runtime_error);
}

TEST_CASE("matmul: gradient matches finite differences on random 4x5 * 5x3") {
  Rng rng(1);
  std::vector<LeafSpec> leaves = {
      {4, 5, oracles::random_values(rng, 20)},
      {5, 3, oracles::random_values(rng, 15)},
  };
  double err = max_grad_rel_err(leaves, [](ad::Tape&, std::vector<ad::Tensor>& l) {
    return ad::frobenius_sq(ad::matmul(l[0], l[1]));
  });
  CHECK(err < 1e-6);
}

TEST_CASE("row_softmax: constant row is uniform; frozen scalar case") {
  ad::Tape tape;
  ad::Tensor flat = tape.constant(1, 4, {0.7, 0.7, 0.7, 0.7});
  for (double tau : {0.1, 0.3, 2.0}) {
    ad::Tensor s = ad::row_softmax(flat, tau);
    for (double v : s.value()) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
  }

  // logits (1,0), tau = 0.3: sigma = 1/(1+exp(-1/0.3)) = 0.96555 (recomputed
  // here as the independent check).
  ad::Tensor two = tape.constant(1, 2, {1.0, 0.0});
  ad::Tensor s = ad::row_softmax(two, 0.3);
  double sigma = 1.0 / (1.0 + std::exp(-1.0 / 0.3));
  CHECK(s.value()[0] == doctest::Approx(sigma).epsilon(1e-12));
  CHECK(s.value()[0] == doctest::Approx(0.96555).epsilon(1e-4));
  CHECK(s.value()[1] == doctest::Approx(1.0 - sigma).epsilon(1e-12));

  CHECK_THROWS_AS(ad::row_softmax(two, 0.0), std::runtime_error);
  CHECK_THROWS_AS(ad::row_softmax(two, -1.0), std::runtime_error);
}

TEST_CASE("row_softmax: rows sum to 1 within 1e-12 on random 100x50") {
  Rng rng(2);
  ad::Tape tape;
  ad::Tensor logits = tape.constant(100, 50, oracles::random_values(rng, 5000, -5, 5));
  ad::Tensor s = ad::row_softmax(logits, 0.3);
  for (int i = 0; i < 100; ++i) {
    double sum = 0.0;
    for (int j = 0; j < 50; ++j) sum += s.value()[static_cast<size_t>(i) * 50 + j];
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("row_softmax: invariant to per-row constant shifts within 1e-12") {
  Rng rng(3);
  ad::Tape tape;
  std::vector<double> logits = oracles::random_values(rng, 8 * 6, -2, 2);
  std::vector<double> shifted = logits;
  for (int i = 0; i < 8; ++i) {
    double c = rng.uniform(-10.0, 10.0);
    for (int j = 0; j < 6; ++j) shifted[static_cast<size_t>(i) * 6 + j] += c;
  }
  ad::Tensor s0 = ad::row_softmax(tape.constant(8, 6, logits), 0.3);
  ad::Tensor s1 = ad::row_softmax(tape.constant(8, 6, shifted), 0.3);
  for (size_t i = 0; i < s0.value().size(); ++i)
    CHECK(std::abs(s0.value()[i] - s1.value()[i]) < 1e-12);
}

TEST_CASE("row_softmax: gradient check") {
  Rng rng(4);
  std::vector<LeafSpec> leaves = {{5, 7, oracles::random_values(rng, 35)}};
  double err = max_grad_rel_err(leaves, [](ad::Tape& t, std::vector<ad::Tensor>& l) {
    // weighted so the gradient is not annihilated by the rows-sum-to-1 constraint
    return ad::sum_all(ad::matmul(ad::row_softmax(l[0], 0.3),
                                  t.constant(7, 1, {1, -2, 3, -4, 5, -6, 7})));
  });
  CHECK(err < 1e-6);
}

TEST_CASE("elementwise and structural ops: values") {
  ad::Tape tape;
  ad::Tensor v = tape.constant(1, 2, {-1.0, 2.0});
  CHECK(ad::relu(v).value() == std::vector<double>{0.0, 2.0});

  ad::Tensor row = tape.constant(1, 3, {1, 2, 3});
  CHECK(ad::global_max_pool(row).value() == std::vector<double>{1, 2, 3});

  ad::Tensor m = tape.constant(2, 2, {5, -1, 0.5, 4});
  CHECK(ad::global_max_pool(m).value() == std::vector<double>{5, 4});

  ad::Tensor t = ad::transpose(tape.constant(2, 3, {1, 2, 3, 4, 5, 6}));
  CHECK(t.value() == std::vector<double>{1, 4, 2, 5, 3, 6});

  ad::Tensor cat = ad::concat_cols(tape.constant(2, 1, {1, 2}), tape.constant(2, 2, {3, 4, 5, 6}));
  CHECK(cat.value() == std::vector<double>{1, 3, 4, 2, 5, 6});

  ad::Tensor rep = ad::repeat_rows(tape.constant(1, 2, {7, 8}), 3);
  CHECK(rep.value() == std::vector<double>{7, 8, 7, 8, 7, 8});

  ad::Tensor biased = ad::add_row_bias(tape.constant(2, 2, {1, 2, 3, 4}),
                                       tape.constant(1, 2, {10, 20}));
  CHECK(biased.value() == std::vector<double>{11, 22, 13, 24});

  ad::Tensor g = ad::gather_rows(tape.constant(3, 2, {1, 2, 3, 4, 5, 6}), {2, 0, 2});
  CHECK(g.value() == std::vector<double>{5, 6, 1, 2, 5, 6});

  // scatter_cols realizes S * P for P(j, index[j]) = 1
  ad::Tensor sc = ad::scatter_cols(tape.constant(1, 3, {1, 2, 4}), {1, 0, 1});
  CHECK(sc.value() == std::vector<double>{2, 5, 0});
}

TEST_CASE("elementwise and structural ops: gradient checks") {
  Rng rng(5);
  auto check = [&](const char* what, std::vector<LeafSpec> leaves,
                   oracles::LossBuilder build) {
    INFO(what);
    CHECK(max_grad_rel_err(leaves, build) < 1e-6);
  };

  check("relu", {{3, 4, oracles::random_values_off_kink(rng, 12)}},
        [](ad::Tape&, std::vector<ad::Tensor>& l) {
          return ad::frobenius_sq(ad::relu(l[0]));
        });
  check("add+scale+sub", {{2, 3, oracles::random_values(rng, 6)},
                          {2, 3, oracles::random_values(rng, 6)}},
        [](ad::Tape&, std::vector<ad::Tensor>& l) {
          return ad::frobenius_sq(ad::sub(ad::add(l[0], ad::scale(l[1], 2.5)), l[0]));
        });
  check("transpose", {{3, 2, oracles::random_values(rng, 6)}},
        [](ad::Tape& t, std::vector<ad::Tensor>& l) {
          return ad::frobenius_sq(ad::matmul(ad::transpose(l[0]), t.constant(3, 1, {1, 2, -1})));
        });
  check("concat_cols", {{3, 2, oracles::random_values(rng, 6)},
                        {3, 3, oracles::random_values(rng, 9)}},
        [](ad::Tape&, std::vector<ad::Tensor>& l) {
          return ad::frobenius_sq(ad::concat_cols(l[0], l[1]));
        });
  check("repeat_rows", {{1, 4, oracles::random_values(rng, 4)}},
        [](ad::Tape&, std::vector<ad::Tensor>& l) {
          return ad::frobenius_sq(ad::repeat_rows(l[0], 5));
        });
  check("add_row_bias", {{4, 3, oracles::random_values(rng, 12)},
                         {1, 3, oracles::random_values(rng, 3)}},
        [](ad::Tape&, std::vector<ad::Tensor>& l) {
          return ad::frobenius_sq(ad::add_row_bias(l[0], l[1]));
        });
  check("gather_rows", {{4, 3, oracles::random_values(rng, 12)}},
        [](ad::Tape&, std::vector<ad::Tensor>& l) {
          return ad::frobenius_sq(ad::gather_rows(l[0], {3, 1, 1, 0, 2}));
        });
  check("scatter_cols", {{3, 4, oracles::random_values(rng, 12)}},
        [](ad::Tape&, std::vector<ad::Tensor>& l) {
          return ad::frobenius_sq(ad::scatter_cols(l[0], {2, 0, 2, 1}));
        });
  check("sqrt_eps", {{2, 2, oracles::random_values(rng, 4)}},
        [](ad::Tape&, std::vector<ad::Tensor>& l) {
          return ad::sqrt_eps(ad::frobenius_sq(l[0]), 1e-12);
        });
  check("sum_all", {{3, 3, oracles::random_values(rng, 9)}},
        [](ad::Tape&, std::vector<ad::Tensor>& l) {
          ad::Tensor s = ad::sum_all(l[0]);
          return ad::frobenius_sq(s);
        });

  // max pool: margins kept clear of ties so the finite difference is smooth
  std::vector<double> pool_vals = oracles::random_values(rng, 4 * 3);
  pool_vals[0] += 3.0;
  pool_vals[7] += 3.0;
  pool_vals[11] += 3.0;
  check("global_max_pool", {{4, 3, pool_vals}},
        [](ad::Tape&, std::vector<ad::Tensor>& l) {
          return ad::frobenius_sq(ad::global_max_pool(l[0]));
        });
}

TEST_CASE("global_max_pool: ties route gradient to the lowest row") {
  ad::Tape tape;
  ad::Tensor x = tape.leaf(3, 1, {2.0, 2.0, 1.0});
  ad::Tensor loss = ad::sum_all(ad::global_max_pool(x));
  tape.backward(loss);
  CHECK(x.grad() == std::vector<double>{1.0, 0.0, 0.0});
}

TEST_CASE("frobenius_sq: zero, hand value, closed-form gradient") {
  ad::Tape tape;
  CHECK(ad::frobenius_sq(tape.constant(2, 2, {0, 0, 0, 0})).scalar() == 0.0);
  // 1 + 4 + 9 + 16
  CHECK(ad::frobenius_sq(tape.constant(2, 2, {1, 2, 3, 4})).scalar() == 30.0);

  ad::Tensor x = tape.leaf(2, 2, {1, 2, 3, 4});
  tape.backward(ad::frobenius_sq(x));
  CHECK(x.grad() == std::vector<double>{2, 4, 6, 8});
}

TEST_CASE("backward: sum gives ones; repeated calls accumulate") {
  ad::Tape tape;
  ad::Tensor x = tape.leaf(2, 3, {1, -2, 3, 4, -5, 6});
  ad::Tensor loss = ad::sum_all(x);
  tape.backward(loss);
  CHECK(x.grad() == std::vector<double>(6, 1.0));
  tape.backward(loss);
  CHECK(x.grad() == std::vector<double>(6, 2.0));
  tape.reset_grads();
  tape.backward(loss);
  CHECK(x.grad() == std::vector<double>(6, 1.0));
}

TEST_CASE("backward: rejects non-scalar losses and foreign tapes") {
  ad::Tape tape;
  ad::Tensor x = tape.leaf(2, 2, {1, 2, 3, 4});
  CHECK_THROWS_AS(tape.backward(x), std::runtime_error);
  ad::Tape other;
  ad::Tensor y = other.leaf(1, 1, {1});
  CHECK_THROWS_AS(tape.backward(y), std::runtime_error);
}

TEST_CASE("backward: DAG with two consumers sums both contributions") {
  // f(x) = ||x||^2 + sum(x); df/dx = 2x + 1.
  ad::Tape tape;
  std::vector<double> vals = {0.5, -1.25, 2.0, 0.75};
  ad::Tensor x = tape.leaf(2, 2, vals);
  ad::Tensor loss = ad::add(ad::frobenius_sq(x), ad::sum_all(x));
  tape.backward(loss);
  for (size_t i = 0; i < vals.size(); ++i)
    CHECK(x.grad()[i] == doctest::Approx(2.0 * vals[i] + 1.0).epsilon(1e-14));
}

TEST_CASE("tensor blob serialization round-trips") {
  std::stringstream buf;
  std::vector<double> data = {1.5, -2.25, 3.0, 0.0, 1e-300, 4.75};
  ad::write_blob(buf, 2, 3, data);
  int r = 0, c = 0;
  std::vector<double> back;
  ad::read_blob(buf, r, c, back);
  CHECK(r == 2);
  CHECK(c == 3);
  CHECK(back == data);
}

TEST_CASE("finite checking mode flags NaN outputs") {
  ad::Tape tape;
  tape.check_finite = true;
  ad::Tensor x = tape.constant(1, 1, {-1.0});
  CHECK_THROWS_WITH_AS(ad::sqrt_eps(x, 0.0), doctest::Contains("non-finite"),
                       std::runtime_error);
}
