/* Copyright (c) 2026 The cfcondense Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cfcondense/cf_engine.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cfcondense;
using test::rand_between;

namespace {

struct Instance {
  Matrix x, y;
  FrequencyBatch<double> f;
};

Instance random_instance(Rng& rng, Eigen::Index max_n = 8, Eigen::Index max_d = 4,
                         Eigen::Index max_k = 16) {
  const auto d = rand_between(rng, 1, max_d);
  Instance in;
  in.x = gaussian_matrix<double>(rand_between(rng, 1, max_n), d, 1.0, rng);
  in.y = gaussian_matrix<double>(rand_between(rng, 1, max_n), d, 1.0, rng);
  in.f = sample_frequencies<double>(d, rand_between(rng, 1, max_k), 0.8, rng);
  return in;
}

}  // namespace

TEST_CASE("empirical CF matches complex exponential sums") {
  auto rng = make_rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = random_instance(rng);
    const auto got = empirical_cf(in.x, in.f);
    const auto want = oracle::cf(in.x, in.f.freqs);
    for (Eigen::Index k = 0; k < got.size(); ++k) {
      CHECK(std::abs(got.re(k) - want[k].real()) < 1e-14);
      CHECK(std::abs(got.im(k) - want[k].imag()) < 1e-14);
      CHECK(std::abs(got.amplitude()(k) - std::abs(want[k])) < 1e-14);
    }
  }
}

TEST_CASE("cfd matches the complex oracle") {
  auto rng = make_rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = random_instance(rng);
    CHECK(test::rel_err(cfd(in.x, in.y, in.f), oracle::cfd(in.x, in.y, in.f.freqs)) < 1e-12);
  }
}

TEST_CASE("amplitude/phase decomposition equals the squared modulus") {
  auto rng = make_rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = random_instance(rng);
    const auto terms = cfd_terms(empirical_cf(in.x, in.f), empirical_cf(in.y, in.f));
    const auto px = oracle::cf(in.x, in.f.freqs), py = oracle::cf(in.y, in.f.freqs);
    for (Eigen::Index k = 0; k < terms.size(); ++k)
      CHECK(test::rel_err(terms(k), std::norm(px[k] - py[k])) < 1e-12);
  }
}

TEST_CASE("weighted terms split into amplitude and phase parts") {
  auto rng = make_rng(4);
  const auto in = random_instance(rng);
  const auto cx = empirical_cf(in.x, in.f), cy = empirical_cf(in.y, in.f);
  const Vector amp = cfd_terms(cx, cy, {1.0, 0.0});
  const Vector phase = cfd_terms(cx, cy, {0.0, 1.0});
  const Vector both = cfd_terms(cx, cy, {0.3, 1.7});
  CHECK(test::max_rel_err(both, (0.3 * amp + 1.7 * phase).eval()) < 1e-12);
  CHECK((amp.array() >= 0).all());
  CHECK((phase.array() >= 0).all());
}

TEST_CASE("cfd gradient matches finite differences") {
  auto rng = make_rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = random_instance(rng);
    const Matrix g = cfd_grad(in.x, in.y, in.f);
    const Matrix fd = test::numeric_grad([&](const Matrix& y) { return cfd(in.x, y, in.f); }, in.y);
    CHECK(test::max_rel_err(g, fd) < 1e-4);
  }
}

TEST_CASE("weighted cfd gradient matches finite differences") {
  auto rng = make_rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = random_instance(rng);
    const CfdWeights w{0.4, 1.6};
    const Matrix g = cfd_grad(in.x, in.y, in.f, w);
    const Matrix fd =
        test::numeric_grad([&](const Matrix& y) { return cfd(in.x, y, in.f, w); }, in.y);
    CHECK(test::max_rel_err(g, fd) < 1e-4);
  }
}

TEST_CASE("one-dimensional gradient has the analytic closed form") {
  // |e^{itx} - e^{itz}|^2 = 2 - 2 cos(t (z - x)), d/dz = 2 t sin(t (z - x)).
  for (double t : {-1.3, 0.2, 2.5}) {
    for (double dz : {-0.7, 0.1, 1.9}) {
      Matrix x(1, 1), z(1, 1);
      x << 0.4;
      z << 0.4 + dz;
      FrequencyBatch<double> f{Matrix::Constant(1, 1, t), 1.0};
      const auto vg = cfd_value_and_grad(x, z, f);
      CHECK(vg.value == doctest::Approx(2 - 2 * std::cos(t * dz)).epsilon(1e-12));
      CHECK(vg.grad(0, 0) == doctest::Approx(2 * t * std::sin(t * dz)).epsilon(1e-12));
    }
  }
}

TEST_CASE("cfd metric axioms") {
  auto rng = make_rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto in = random_instance(rng);
    const double xy = cfd(in.x, in.y, in.f);
    CHECK(xy >= 0);
    CHECK(test::rel_err(cfd(in.y, in.x, in.f), xy) < 1e-12);
    CHECK(std::abs(cfd(in.x, in.x, in.f)) < 1e-15);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(in.y.rows()));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    shuffle(perm.begin(), perm.end(), rng);
    const Matrix py = in.y(perm, Eigen::all);
    CHECK(test::rel_err(cfd(in.x, py, in.f), xy) < 1e-12);
  }
}

TEST_CASE("cfd estimator variance shrinks with more frequencies") {
  auto rng = make_rng(8);
  const Matrix x = gaussian_matrix<double>(64, 3, 1.0, rng);
  Matrix y = gaussian_matrix<double>(64, 3, 1.0, rng);
  y.col(0).array() += 0.5;
  const auto spread = [&](Eigen::Index k) {
    std::vector<double> vals;
    for (int r = 0; r < 30; ++r)
      vals.push_back(cfd(x, y, sample_frequencies<double>(3, k, 1.0, rng)));
    const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / 30;
    double var = 0;
    for (double v : vals) var += (v - mean) * (v - mean);
    return std::sqrt(var / 29);
  };
  const double s256 = spread(256), s4096 = spread(4096);
  CHECK(s4096 < s256 / 2);
}

TEST_CASE("frequency sampling statistics") {
  const auto f = sample_frequencies<double>(3, 20000, 0.7, std::uint64_t{11});
  CHECK(f.count() == 20000);
  CHECK(f.dim() == 3);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double mean = f.freqs.col(j).mean();
    const double sd = std::sqrt((f.freqs.col(j).array() - mean).square().sum() / 19999);
    CHECK(std::abs(mean) < 0.02);
    CHECK(sd == doctest::Approx(0.7).epsilon(0.02));
  }
  CHECK(sample_frequencies<double>(3, 8, 0.7, std::uint64_t{11}).freqs ==
        sample_frequencies<double>(3, 8, 0.7, std::uint64_t{11}).freqs);
  test::check_error(ErrorCode::kInvalidArgument,
                    [] { sample_frequencies<double>(3, 8, 0.0, std::uint64_t{1}); });
}

TEST_CASE("float instantiation agrees with double") {
  auto rng = make_rng(9);
  const auto in = random_instance(rng);
  const FrequencyBatch<float> ff{in.f.freqs.cast<float>(), 0.8f};
  const float v = cfd(in.x.cast<float>().eval(), in.y.cast<float>().eval(), ff);
  CHECK(v == doctest::Approx(cfd(in.x, in.y, in.f)).epsilon(1e-4));
}

TEST_CASE("dimension mismatches are rejected") {
  const Matrix x = Matrix::Ones(3, 2), y = Matrix::Ones(3, 3);
  const auto f = sample_frequencies<double>(2, 4, 1.0, std::uint64_t{0});
  test::check_error(ErrorCode::kDimensionMismatch, [&] { cfd(x, y, f); });
  test::check_error(ErrorCode::kDimensionMismatch, [&] { empirical_cf(y, f); });
  test::check_error(ErrorCode::kDimensionMismatch, [&] { mmd(x, y, 1.0); });
}

TEST_CASE("mmd matches the triple-loop oracle") {
  auto rng = make_rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = random_instance(rng);
    const double bw = 0.5 + static_cast<double>(uniform_index(100, rng)) / 50.0;
    CHECK(test::rel_err(mmd(in.x, in.y, bw), oracle::mmd(in.x, in.y, bw)) < 1e-10);
  }
}

TEST_CASE("mmd axioms and singleton closed form") {
  auto rng = make_rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto in = random_instance(rng);
    const double bw = 1.3;
    CHECK(mmd(in.x, in.x, bw) < 1e-14);
    CHECK(mmd(in.x, in.y, bw) >= 0);
    const Matrix a = in.x.topRows(1), b = in.y.topRows(1);
    const double d2 = (a - b).squaredNorm();
    CHECK(mmd(a, b, bw) == doctest::Approx(2 - 2 * std::exp(-d2 / (2 * bw * bw))).epsilon(1e-12));
  }
}

TEST_CASE("mmd gradient matches finite differences") {
  auto rng = make_rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = random_instance(rng);
    const double bw = 1.1;
    const Matrix g = mmd_grad(in.x, in.y, bw);
    // The unclamped oracle avoids the kink of max(., 0) near zero.
    const Matrix fd =
        test::numeric_grad([&](const Matrix& y) { return oracle::mmd(in.x, y, bw); }, in.y);
    CHECK(test::max_rel_err(g, fd) < 1e-4);
  }
}

TEST_CASE("very wide bandwidth flattens the mmd gradient") {
  auto rng = make_rng(13);
  const auto in = random_instance(rng);
  CHECK(mmd_grad(in.x, in.y, 1e6).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("median pairwise distance matches brute force") {
  auto rng = make_rng(14);
  const Matrix p = gaussian_matrix<double>(9, 3, 1.0, rng);
  std::vector<double> d;
  for (int i = 0; i < 9; ++i)
    for (int j = i + 1; j < 9; ++j) d.push_back((p.row(i) - p.row(j)).norm());
  std::sort(d.begin(), d.end());
  CHECK(median_pairwise_distance(p, 100, rng) == d[d.size() / 2]);
  test::check_error(ErrorCode::kInvalidArgument,
                    [&] { median_pairwise_distance(Matrix(p.topRows(1)), 100, rng); });
}
