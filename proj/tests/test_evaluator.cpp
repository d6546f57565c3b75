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

#include "cfcondense/evaluator.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cfcondense;

namespace {

ProbeConfig fast_probe() {
  ProbeConfig p;
  p.epochs = 20;
  p.min_steps = 500;
  p.lr = 0.01;
  return p;
}

// Full-batch gradient descent on the same regularised softmax objective.
double reference_probe_accuracy(const Matrix& x, const Labels& y, const Matrix& tx,
                                const Labels& ty, Eigen::Index classes) {
  Matrix w = Matrix::Zero(x.cols() + 1, classes);
  Matrix xb(x.rows(), x.cols() + 1);
  xb << x, Matrix::Ones(x.rows(), 1);
  Matrix onehot = Matrix::Zero(x.rows(), classes);
  for (std::size_t i = 0; i < y.size(); ++i) onehot(static_cast<Eigen::Index>(i), y[i]) = 1;
  for (int step = 0; step < 2000; ++step) {
    Matrix p = xb * w;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      p.row(i).array() -= p.row(i).maxCoeff();
      p.row(i) = p.row(i).array().exp().matrix();
      p.row(i) /= p.row(i).sum();
    }
    w -= 0.5 * (xb.transpose() * (p - onehot) / static_cast<double>(x.rows()) + 1e-4 * w);
  }
  Matrix tb(tx.rows(), tx.cols() + 1);
  tb << tx, Matrix::Ones(tx.rows(), 1);
  const Matrix s = tb * w;
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    Eigen::Index best;
    s.row(i).maxCoeff(&best);
    hits += static_cast<std::uint32_t>(best) == ty[static_cast<std::size_t>(i)];
  }
  return static_cast<double>(hits) / static_cast<double>(ty.size());
}

}  // namespace

TEST_CASE("probe separates well-separated classes") {
  CorpusParams p{.num_classes = 4, .per_class = 50, .dim = 6, .class_separation = 8.0};
  const auto train = generate_corpus(p);
  const auto test = generate_corpus_holdout(p, 50);
  CHECK(train_linear_probe(train, test, fast_probe()) == 1.0);
}

TEST_CASE("probe is at chance on shuffled labels") {
  CorpusParams p{.num_classes = 4, .per_class = 60, .dim = 6};
  const auto train = generate_corpus(p);
  const auto test = generate_corpus_holdout(p, 60);
  auto labels = train.labels();
  auto rng = make_rng(3);
  shuffle(labels.begin(), labels.end(), rng);
  const Matrix x = probe_features(train, fast_probe());
  const auto probe = fit_linear_probe(x, labels, 4, fast_probe());
  const double acc = accuracy(probe.predict(probe_features(test, fast_probe())), test.labels());
  CHECK(acc < 0.45);
}

TEST_CASE("probe agrees with a full-batch reference") {
  CorpusParams p{.num_classes = 5, .per_class = 80, .dim = 8, .class_separation = 1.5};
  const auto train = generate_corpus(p);
  const auto test = generate_corpus_holdout(p, 80);
  const auto cfg = fast_probe();
  const double ref = reference_probe_accuracy(probe_features(train, cfg), train.labels(),
                                              probe_features(test, cfg), test.labels(), 5);
  CHECK(std::abs(train_linear_probe(train, test, cfg) - ref) < 0.05);
}

TEST_CASE("probe feature layouts") {
  const auto d = generate_corpus({.num_classes = 2, .per_class = 3, .dim = 2});
  ProbeConfig c;
  CHECK(probe_features(d, c).cols() == 4);
  c.input = ProbeInput::kSum;
  CHECK(probe_features(d, c) == d.modality(0).data + d.modality(1).data);
  c.input = ProbeInput::kSingle;
  c.modality = 1;
  CHECK(probe_features(d, c) == d.modality(1).data);
  c.modality = 2;
  CHECK_THROWS_AS(probe_features(d, c), Error);
}

TEST_CASE("recall matches the sorting oracle") {
  auto rng = make_rng(50);
  for (int trial = 0; trial < 100; ++trial) {
    const auto q = test::rand_between(rng, 1, 12), g = test::rand_between(rng, 1, 15);
    const auto d = test::rand_between(rng, 1, 5);
    const Matrix queries = gaussian_matrix<double>(q, d, 1.0, rng);
    Matrix gallery = gaussian_matrix<double>(g, d, 1.0, rng);
    if (g > 2) gallery.row(g - 1) = gallery.row(0);  // exact tie
    Relevance rel(q, g);
    for (Eigen::Index i = 0; i < q; ++i) {
      for (Eigen::Index j = 0; j < g; ++j) rel(i, j) = uniform_index(4, rng) == 0;
      rel(i, static_cast<Eigen::Index>(uniform_index(static_cast<std::uint64_t>(g), rng))) = true;
    }
    double last = 0;
    for (std::uint32_t k = 1; k <= static_cast<std::uint32_t>(g) + 2; ++k) {
      const double r = recall_at_k(queries, gallery, rel, k);
      CHECK(r == oracle::recall(queries, gallery, rel, k));
      CHECK(r >= last);
      last = r;
    }
    CHECK(last == 1.0);
  }
}

TEST_CASE("ties resolve to the lower gallery index") {
  Matrix q(1, 2), g(2, 2);
  q << 1, 0;
  g << 2, 0, 2, 0;
  Relevance rel(1, 2);
  rel << false, true;
  CHECK(recall_at_k(q, g, rel, 1) == 0.0);
  rel << true, false;
  CHECK(recall_at_k(q, g, rel, 1) == 1.0);
}

TEST_CASE("queries without relevant items are rejected") {
  const Matrix q = Matrix::Ones(2, 3), g = Matrix::Ones(4, 3);
  Relevance rel = Relevance::Constant(2, 4, false);
  rel(0, 1) = true;
  test::check_error(ErrorCode::kInvalidRelevance, [&] { recall_at_k(q, g, rel, 1); });
  test::check_error(ErrorCode::kDimensionMismatch,
                    [&] { recall_at_k(q, g, Relevance::Constant(4, 2, true), 1); });
}

TEST_CASE("paired retrieval beats chance on coupled data") {
  CorpusParams p{.num_classes = 4, .per_class = 100, .dim = 8, .cross_modal_coupling = 0.9};
  const auto train = generate_corpus(p);
  const auto test = generate_corpus_holdout(p, 25);
  const auto r = paired_retrieval(train, test);
  REQUIRE(r.a2t.size() == 3);
  CHECK(r.a2t[0] > 0.1);  // chance is 0.01
  CHECK(r.t2a[0] > 0.1);
  CHECK(r.a2t[0] <= r.a2t[1]);
  CHECK(r.a2t[1] <= r.a2t[2]);
}

TEST_CASE("cross-modal consistency") {
  const auto real = generate_corpus({.num_classes = 3, .per_class = 20, .dim = 5});
  SUBCASE("a set compared with itself scores zero") {
    for (double v : cross_modal_consistency(real, real)) CHECK(v == 0.0);
  }
  SUBCASE("matches a direct computation") {
    const auto syn = init_random(real, 4, 1);
    const auto got = cross_modal_consistency(real, syn);
    const auto mean_cos = [](const Matrix& a, const Matrix& v) {
      double s = 0;
      for (Eigen::Index i = 0; i < a.rows(); ++i)
        s += oracle::cosine(a.row(i).transpose(), v.row(i).transpose());
      return s / static_cast<double>(a.rows());
    };
    for (std::uint32_t c = 0; c < 3; ++c) {
      const auto block = [&](const Matrix& m) { return Matrix(m.middleRows(c * 20, 20)); };
      const double want =
          std::abs(mean_cos(block(real.modality(0).data), block(real.modality(1).data)) -
                   mean_cos(syn.modalities[0].middleRows(c * 4, 4), syn.modalities[1].middleRows(c * 4, 4)));
      CHECK(got[c] == doctest::Approx(want).epsilon(1e-12));
    }
  }
  SUBCASE("single-row classes score zero") {
    const auto syn = init_random(real, 1, 0);
    for (double v : cross_modal_consistency(real, syn)) CHECK(v == 0.0);
  }
}

TEST_CASE("mean and sample standard deviation") {
  const auto [m, s] = mean_std({1.0, 2.0, 3.0, 4.0});
  CHECK(m == 2.5);
  CHECK(s == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(mean_std({7.0}).second == 0.0);
}

TEST_CASE("method comparison report") {
  CorpusParams p{.num_classes = 3, .per_class = 30, .dim = 4};
  const auto train = generate_corpus(p);
  const auto test = generate_corpus_holdout(p, 10);
  CompareSpec spec;
  spec.dpc_list = {2};
  spec.seeds = {0, 1};
  spec.condense.iterations = 3;
  spec.condense.freq_count = 64;
  spec.probe = fast_probe();
  const auto report = compare_methods(train, test, spec);
  CHECK(report.rows.size() == 8);
  CHECK(report.summaries.size() == 4);
  CHECK_NOTHROW(report.check_invariants());
  const auto csv = report.to_csv();
  CHECK(csv.rfind("method,dpc,seed,probe_accuracy,recall_a2t@1,recall_a2t@5,recall_a2t@10,"
                  "recall_t2a@1,recall_t2a@5,recall_t2a@10\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
  CHECK(report.rows[3].method == "herding");
  CHECK(report.rows[6].final_loss > 0);
  CHECK(compare_methods(train, test, spec).to_csv() == csv);

  auto broken = report;
  broken.rows[0].recall.a2t = {0.5, 0.4, 0.6};
  test::check_error(ErrorCode::kInvalidArgument, [&] { broken.check_invariants(); });
  test::check_error(ErrorCode::kConfig, [] { parse_method("nope"); });
  CHECK(parse_method("cfd_condense") == Method::kCfdCondense);
}
