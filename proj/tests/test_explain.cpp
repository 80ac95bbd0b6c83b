#include "doctest.h"
#include "margin/error.hpp"
#include "margin/explain.hpp"
#include "margin/knn.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace margin;

namespace {

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

Graph induced(const Graph& g, const std::vector<Index>& nodes) {
  std::map<Index, Index> local;
  for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<Index>(i);
  std::vector<Edge> edges;
  for (const auto& e : g.edges()) {
    if (local.count(e.src) && local.count(e.dst)) edges.push_back({local[e.src], local[e.dst], e.weight});
  }
  return Graph::from_edges(static_cast<Index>(nodes.size()), edges);
}

}  // namespace

TEST_CASE("mmd closed forms") {
  const auto r = mmd(column({0}), column({1}), KernelConfig::fixed(1.0));
  CHECK(std::abs(r.squared - (2.0 - 2.0 * std::exp(-0.5))) <= 1e-12);
  CHECK(r.value == doctest::Approx(std::sqrt(r.squared)));
  CHECK(r.sigma == 1.0);

  Rng rng(1);
  const Matrix a = synth::normal_matrix(rng, 9, 3);
  CHECK(mmd(a, a).squared <= 1e-12);
  CHECK(mmd(a, a).squared >= 0.0);
}

TEST_CASE("mmd matches brute-force double sums") {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const Index d = 1 + rng.below(5);
    const Matrix a = synth::normal_matrix(rng, 2 + rng.below(19), d);
    const Matrix b = synth::normal_matrix(rng, 2 + rng.below(19), d, 1.5);
    const double sigma = 0.3 + 2.0 * rng.uniform();
    const auto biased = mmd(a, b, KernelConfig::fixed(sigma));
    CHECK(std::abs(biased.squared - oracle::mmd2(a, b, sigma)) <= 1e-12);
    const auto unbiased = mmd(a, b, KernelConfig::fixed(sigma), MmdEstimator::Unbiased);
    CHECK(std::abs(unbiased.squared - oracle::mmd2_unbiased(a, b, sigma)) <= 1e-12);
  }
  CHECK(mmd(column({0, 1}), column({5, 6})).sigma == doctest::Approx(oracle::median_distance(column({0, 1, 5, 6}))));
}

TEST_CASE("mmd input checks") {
  CHECK_THROWS_AS(mmd(Matrix(0, 2), Matrix::Zero(2, 2)), Error);
  CHECK_THROWS_AS(mmd(Matrix::Zero(2, 2), Matrix::Zero(2, 3)), Error);
  CHECK_THROWS_AS(mmd(column({1}), column({1, 2}), {}, MmdEstimator::Unbiased), Error);
  CHECK_THROWS_AS(mmd(column({1}), column({2}), KernelConfig::fixed(0.0)), Error);
}

TEST_CASE("median heuristic") {
  const Matrix x = column({0, 1, 3, 7});
  CHECK(median_pairwise_distance(x) == oracle::median_distance(x));
  // mostly coincident rows: median 0 falls back to the mean positive distance
  CHECK(median_pairwise_distance(column({2, 2, 2, 2, 5})) == 3.0);
  CHECK(median_pairwise_distance(column({4, 4, 4})) == 1.0);
  Rng rng(3);
  const Matrix big = synth::normal_matrix(rng, 60, 2);
  const double strided = median_pairwise_distance(big, 20);
  Matrix sub(20, 2);
  for (Index i = 0; i < 20; ++i) sub.row(i) = big.row(i * 60 / 20);
  CHECK(strided == oracle::median_distance(sub));
}

TEST_CASE("global MMD function on four points matches explicit removal") {
  KnnConfig cfg;
  cfg.k = 1;
  const Matrix x = column({0.0, 0.4, 3.0, 3.5});
  const Graph g = build_knn_graph(x, cfg);
  const auto f = mmd_global_function(x, g, KernelConfig::fixed(1.0));
  const Matrix w = oracle::dense(g.adjacency());
  const std::vector<Index> all{0, 1, 2, 3};
  for (Index i = 0; i < 4; ++i) CHECK(std::abs(f.values[i] - oracle::leave_out_mmd(x, w, i, 1.0, all)) <= 1e-12);
  CHECK(f.flagged.empty());
}

TEST_CASE("global MMD function matches explicit removal on random data") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 6 + rng.below(20);
    const Matrix x = synth::normal_matrix(rng, n, 2);
    KnnConfig cfg;
    cfg.k = 1 + rng.below(3);
    const Graph g = build_knn_graph(x, cfg);
    const auto f = mmd_global_function(x, g);
    CHECK(f.sigma == doctest::Approx(oracle::median_distance(x)).epsilon(1e-14));
    const Matrix w = oracle::dense(g.adjacency());
    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Index{0});
    for (Index i = 0; i < n; ++i) {
      const double expected = oracle::leave_out_mmd(x, w, i, f.sigma, all);
      if (expected < 0.0) {
        CHECK(std::find(f.flagged.begin(), f.flagged.end(), i) != f.flagged.end());
        continue;
      }
      CHECK(std::abs(f.values[i] - expected) <= 1e-12);
    }
  }
}

TEST_CASE("a node whose neighborhood covers everything takes the maximum and is flagged") {
  const std::vector<Edge> star{{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}};
  const Matrix x = column({0.0, 1.0, 2.0, 5.0});
  const auto f = mmd_global_function(x, Graph::from_edges(4, star), KernelConfig::fixed(1.0));
  CHECK(f.flagged == std::vector<Index>{0});
  CHECK(f.values[0] == std::max({f.values[1], f.values[2], f.values[3]}));
  CHECK_FALSE(f.note.empty());
}

TEST_CASE("a heavily duplicated sample is typical") {
  Matrix x(12, 2);
  for (Index i = 0; i < 10; ++i) x.row(i) << 1.0, 1.0;
  x.row(10) << 4.0, 0.0;
  x.row(11) << -3.0, 2.0;
  const Graph g = Graph::from_edges(12, {});
  const auto f = mmd_global_function(x, g, KernelConfig::fixed(1.0));
  CHECK(f.values[0] < 1e-3);
  CHECK(f.values[0] < f.values[10]);
  CHECK(f.values[0] < f.values[11]);
}

TEST_CASE("local MMD function") {
  Rng rng(5);
  const auto data = synth::gaussian_classes(rng, {15, 12}, 2, 30.0);
  KnnConfig cfg;
  cfg.k = 3;
  const Graph g = build_knn_graph(data.features, cfg);
  const auto kernel = KernelConfig::fixed(1.3);

  const std::vector<int> one_class(27, 4);
  CHECK(mmd_local_function(data.features, one_class, g, kernel).values ==
        mmd_global_function(data.features, g, kernel).values);

  const auto local = mmd_local_function(data.features, data.labels, g, kernel);
  for (int c = 0; c < 2; ++c) {
    std::vector<Index> rows;
    for (Index i = 0; i < 27; ++i)
      if (data.labels[static_cast<std::size_t>(i)] == c) rows.push_back(i);
    const auto part = mmd_global_function(oracle::rows(data.features, rows), induced(g, rows), kernel);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      CHECK(std::abs(local.values[rows[r]] - part.values[static_cast<Index>(r)]) <= 1e-12);
    }
  }
}

TEST_CASE("distrust") {
  // node 0 has neighbors 1..4; three of them share its label
  const std::vector<Edge> e{{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}, {0, 4, 1.0}};
  const Graph g = Graph::from_edges(6, e);
  const std::vector<int> labels{0, 0, 0, 0, 1, 1};
  const auto d = distrust_function(g, labels);
  CHECK(d.values[0] == 0.25);
  CHECK(d.values[1] == 0.0);
  CHECK(d.values[4] == 1.0);
  CHECK(d.values[5] == 0.0);
  CHECK(d.flagged == std::vector<Index>{5});
  CHECK_THROWS_AS(distrust_function(g, std::vector<int>{0, 1}), Error);
}

TEST_CASE("kernel density scores") {
  std::map<int, Matrix> ref;
  ref[0] = column({2.0});
  const std::vector<int> pred{0};
  CHECK(kde_scores(column({2.0}), ref, pred, KernelConfig::fixed(1.0)).values[0] == 1.0);
  CHECK(kde_scores(column({200.0}), ref, pred, KernelConfig::fixed(1.0)).values[0] < 1e-300);

  ref[1] = column({-1.0, 0.0, 1.0});
  const std::vector<int> pred1{1};
  const double expected = (2.0 * std::exp(-0.5) + 1.0) / 3.0;
  CHECK(std::abs(kde_scores(column({0.0}), ref, pred1, KernelConfig::fixed(1.0)).values[0] - expected) <= 1e-15);
  const double logged = kde_scores(column({0.0}), ref, pred1, KernelConfig::fixed(1.0), true).values[0];
  CHECK(std::abs(logged - std::log(expected)) <= 1e-14);
  // far queries keep a finite log density
  const double far = kde_scores(column({500.0}), ref, pred1, KernelConfig::fixed(1.0), true).values[0];
  CHECK(std::isfinite(far));
  CHECK(far == doctest::Approx(-(499.0 * 499.0) / 2.0 - std::log(3.0)));

  const std::vector<int> missing{7};
  CHECK_THROWS_AS(kde_scores(column({0.0}), ref, missing), Error);
}

TEST_CASE("sparsity ratio") {
  Vector s(3);
  s << 10, 20, 40;
  CHECK(sparsity_ratio_function(s) == Vector(Eigen::Vector3d(0.25, 0.5, 1.0)));
  CHECK(sparsity_ratio_function(Vector::Constant(4, 7.0)) == Vector::Ones(4));
  CHECK(sparsity_ratio_function(Vector::Constant(1, 3.0)) == Vector::Ones(1));
  CHECK_THROWS_AS(sparsity_ratio_function(Vector::Zero(2)), Error);
}
