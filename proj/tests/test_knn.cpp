#include "doctest.h"
#include "margin/error.hpp"
#include "margin/knn.hpp"
#include "margin/parallel.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace margin;

namespace {

Matrix points(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index r = 0;
  for (const auto& row : rows) {
    Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

std::set<std::pair<Index, Index>> edge_set(const Graph& g) {
  std::set<std::pair<Index, Index>> out;
  for (const auto& e : g.edges()) out.emplace(e.src, e.dst);
  return out;
}

}  // namespace

TEST_CASE("distances between rows") {
  const Matrix m = points({{0, 0}, {3, 4}, {1, 0}, {0, 1}, {0, 0}});
  CHECK(distance(m.row(0), m.row(1), Metric::Euclidean) == 5.0);
  CHECK(distance(m.row(1), m.row(1), Metric::Euclidean) == 0.0);
  CHECK(distance(m.row(1), m.row(1), Metric::Cosine) == 0.0);
  CHECK(distance(m.row(2), m.row(3), Metric::Cosine) == doctest::Approx(1.0).epsilon(1e-15));
  // zero vectors sit at distance 1 from everything
  CHECK(distance(m.row(0), m.row(1), Metric::Cosine) == 1.0);
  CHECK(distance(m.row(0), m.row(4), Metric::Cosine) == 1.0);
}

TEST_CASE("pairwise distances are symmetric with a zero diagonal") {
  Rng rng(3);
  const Matrix x = synth::normal_matrix(rng, 12, 4);
  for (auto metric : {Metric::Euclidean, Metric::Cosine}) {
    const Matrix d = pairwise_distances(x, metric);
    CHECK(d == d.transpose());
    CHECK(d.diagonal().isZero(0.0));
    CHECK(d.minCoeff() >= 0.0);
  }
  CHECK_THROWS_AS(pairwise_distances(Matrix::Zero(1, 2), Metric::Euclidean), Error);
}

TEST_CASE("collinear points with k = 1") {
  KnnConfig cfg;
  cfg.k = 1;
  const Graph g = build_knn_graph(points({{0}, {1}, {10}}), cfg);
  CHECK(edge_set(g) == std::set<std::pair<Index, Index>>{{0, 1}, {1, 2}});
  for (const auto& e : g.edges()) CHECK(e.weight == 1.0);
}

TEST_CASE("two samples and k = 1 give one unit edge") {
  KnnConfig cfg;
  cfg.k = 1;
  const Graph g = build_knn_graph(points({{0, 0}, {2, 1}}), cfg);
  REQUIRE(g.edges().size() == 1);
  CHECK(g.edges()[0].weight == 1.0);
}

TEST_CASE("duplicate points under gaussian weighting") {
  KnnConfig cfg;
  cfg.k = 1;
  cfg.weighting = Weighting::Gaussian;
  cfg.bandwidth = Bandwidth::value(0.5);
  const Graph g = build_knn_graph(points({{1, 1}, {1, 1}, {5, 5}}), cfg);
  CHECK(g.adjacency().coeff(0, 1) == 1.0);
}

TEST_CASE("configuration errors") {
  const Matrix x = points({{0}, {1}, {2}});
  KnnConfig cfg;
  cfg.k = 3;
  CHECK_THROWS_AS(build_knn_graph(x, cfg), Error);
  cfg.k = 0;
  CHECK_THROWS_AS(build_knn_graph(x, cfg), Error);
  cfg.k = 1;
  cfg.weighting = Weighting::Gaussian;
  cfg.bandwidth = Bandwidth::value(-1.0);
  CHECK_THROWS_AS(build_knn_graph(x, cfg), Error);

  Matrix bad = x;
  bad(2, 0) = std::nan("");
  cfg = {};
  cfg.k = 1;
  try {
    build_knn_graph(bad, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_metric("manhattan"), Error);
}

TEST_CASE("identical samples break ties by index") {
  KnnConfig cfg;
  cfg.k = 2;
  const Graph g = build_knn_graph(Matrix::Ones(5, 3), cfg);
  CHECK(validate(g).ok());
  // node 0 picks 1,2; every other node picks the two lowest other ids
  CHECK(edge_set(g) ==
        std::set<std::pair<Index, Index>>{{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {0, 4}, {1, 4}});
}

TEST_CASE("k-NN graph matches exhaustive neighbor search") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 4 + rng.below(40);
    const Index k = 1 + rng.below(std::min<Index>(8, n - 1));
    const Matrix x = synth::normal_matrix(rng, n, 1 + rng.below(4));
    KnnConfig cfg;
    cfg.k = k;
    const Graph g = build_knn_graph(x, cfg);
    CHECK(validate(g).ok());
    CHECK(edge_set(g) == oracle::knn_edges(x, k));
    for (Index i = 0; i < n; ++i) CHECK(static_cast<Index>(g.neighbors(i).size()) >= k);
  }
}

TEST_CASE("gaussian weights and the median bandwidth") {
  Rng rng(8);
  const Matrix x = synth::normal_matrix(rng, 40, 3);
  KnnConfig cfg;
  cfg.k = 4;
  cfg.weighting = Weighting::Gaussian;
  const KnnGraph built = build_knn(x, cfg);
  REQUIRE(built.sigma.has_value());

  std::vector<double> selected;
  for (Index i = 0; i < x.rows(); ++i) {
    std::vector<std::pair<double, Index>> cand;
    for (Index j = 0; j < x.rows(); ++j)
      if (j != i) cand.emplace_back((x.row(i) - x.row(j)).norm(), j);
    std::sort(cand.begin(), cand.end());
    for (Index c = 0; c < cfg.k; ++c) selected.push_back(cand[static_cast<std::size_t>(c)].first);
  }
  std::sort(selected.begin(), selected.end());
  const double expected = 0.5 * (selected[selected.size() / 2 - 1] + selected[selected.size() / 2]);
  CHECK(*built.sigma == doctest::Approx(expected).epsilon(1e-14));

  for (const auto& e : built.graph.edges()) {
    CHECK(e.weight > 0.0);
    CHECK(e.weight <= 1.0);
    const double d = (x.row(e.src) - x.row(e.dst)).norm();
    CHECK(e.weight == doctest::Approx(std::exp(-d * d / (2 * expected * expected))).epsilon(1e-12));
  }
}

TEST_CASE("construction is deterministic and thread-count independent") {
  Rng rng(9);
  const Matrix x = synth::normal_matrix(rng, 300, 5);
  KnnConfig cfg;
  cfg.k = 10;
  cfg.weighting = Weighting::Gaussian;
  cfg.metric = Metric::Cosine;
  set_thread_count(1);
  const Matrix serial = oracle::dense(build_knn_graph(x, cfg).adjacency());
  set_thread_count(8);
  const Matrix threaded = oracle::dense(build_knn_graph(x, cfg).adjacency());
  set_thread_count(0);
  CHECK(serial == threaded);
}

TEST_CASE("median") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS_AS(median({}), Error);
}
