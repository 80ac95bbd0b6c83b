#include <map>

#include "doctest.h"
#include "margin/error.hpp"
#include "margin/influence.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace margin;

namespace {

Graph path3() {
  const std::vector<Edge> e{{0, 1, 1.0}, {1, 2, 1.0}};
  return Graph::from_edges(3, e);
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

InfluenceScores raw(Vector s) {
  InfluenceScores out;
  out.scores = std::move(s);
  return out;
}

}  // namespace

TEST_CASE("influence on the path graph") {
  const auto s = influence_scores(path3(), vec({0, 0, 1}));
  CHECK(s.scores == vec({0, 0.25, 1}));
  CHECK_FALSE(s.normalized);
  CHECK(s.method == "filter");
  const auto a = influence_scores(path3(), vec({0, 0, 1}), ShiftKind::Transition, Magnitude::Absolute);
  CHECK(a.scores == vec({0, 0.5, 1}));
}

TEST_CASE("constant signals have zero influence and scaling is quadratic") {
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 4 + rng.below(50);
    const Graph g = synth::random_knn_graph(rng, n, 1 + rng.below(6), Weighting::Gaussian);
    const double c = 10.0 * rng.normal();
    CHECK(influence_scores(g, Vector::Constant(n, c)).scores.cwiseAbs().maxCoeff() <= 1e-12);
    const Vector f = synth::normal_vector(rng, n);
    const Vector base = influence_scores(g, f).scores;
    CHECK((influence_scores(g, Vector(3.0 * f)).scores - 9.0 * base).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("influence equals the dense evaluation for every operator") {
  Rng rng(14);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 2 + rng.below(40);
    const Graph g = synth::random_graph(rng, n, 0.2);
    const Matrix w = oracle::dense(g.adjacency());
    const Vector f = synth::normal_vector(rng, n);
    for (auto kind : {ShiftKind::Adjacency, ShiftKind::Transition, ShiftKind::Laplacian}) {
      const auto s = influence_scores(g, f, kind);
      CHECK((s.scores - oracle::influence(w, f, kind)).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("isolated nodes keep their own value under the transition operator") {
  const std::vector<Edge> e{{0, 1, 1.0}};
  const Graph g = Graph::from_edges(3, e);
  const auto s = influence_scores(g, vec({1, 2, 3}));
  CHECK(s.isolated == std::vector<Index>{2});
  CHECK(s.scores[2] == 9.0);
}

TEST_CASE("influence is permutation equivariant") {
  Rng rng(15);
  const Graph g = synth::random_knn_graph(rng, 30, 4, Weighting::Gaussian);
  const Vector f = synth::normal_vector(rng, 30);
  const auto order = synth::random_permutation(rng, 30);
  Vector fp(30);
  for (Index i = 0; i < 30; ++i) fp[i] = f[order[i]];
  const Vector s = influence_scores(g, f).scores;
  const Vector sp = influence_scores(permute(g, order), fp).scores;
  for (Index i = 0; i < 30; ++i) CHECK(std::abs(sp[i] - s[order[i]]) <= 1e-12);
}

TEST_CASE("p-hop influence") {
  const Vector f = vec({0, 0, 1});
  const auto s = influence_scores_phop(path3(), f, 1);
  CHECK((s.scores - oracle::phop(oracle::dense(path3().adjacency()), f, 1)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(s.normalized);
  CHECK(s.method == "phop");
  CHECK(s.hops == 1);

  Rng rng(16);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 3 + rng.below(45);
    const Graph g = synth::random_graph(rng, n, 0.12, rng.below(2) == 0);
    const Vector x = synth::normal_vector(rng, n);
    const int hops = 1 + static_cast<int>(rng.below(3));
    const Vector got = influence_scores_phop(g, x, hops).scores;
    CHECK((got - oracle::phop(oracle::dense(g.adjacency()), x, hops)).cwiseAbs().maxCoeff() <= 1e-9);
  }

  const Graph g = synth::random_knn_graph(rng, 40, 5, Weighting::Binary);
  const auto flat = influence_scores_phop(g, Vector::Constant(40, 7.0), 2);
  CHECK(flat.scores.isZero(0.0));
  CHECK_FALSE(flat.normalized);
  CHECK_THROWS_AS(influence_scores_phop(g, Vector::Zero(40), 0), Error);
}

TEST_CASE("one hop on a binary graph ranks like the transition filter of the smoothed signal") {
  Rng rng(17);
  const Graph g = synth::random_knn_graph(rng, 50, 4, Weighting::Binary);
  const Vector f = synth::normal_vector(rng, 50);
  const auto op = shift_operator(g, ShiftKind::Transition);
  const Vector f1 = apply_shift(op, f);
  const Vector expected = high_pass(op, f1).cwiseAbs();
  const Vector got = influence_scores_phop(g, f, 1).scores;
  CHECK((got - expected / expected.maxCoeff()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("vector-valued signals") {
  Rng rng(18);
  const Graph g = synth::random_knn_graph(rng, 10, 3, Weighting::Gaussian);
  const Vector f = synth::normal_vector(rng, 10);
  CHECK(influence_scores_vector(g, Matrix(f)).scores == influence_scores(g, f).scores);

  Matrix same(10, 3);
  same.rowwise() = Eigen::RowVector3d(1.0, -2.0, 0.5);
  CHECK(influence_scores_vector(g, same).scores.cwiseAbs().maxCoeff() <= 1e-12);

  const Matrix big = synth::normal_matrix(rng, 10, 3);
  Vector sum = Vector::Zero(10);
  for (Index c = 0; c < 3; ++c) sum += influence_scores(g, Vector(big.col(c))).scores;
  CHECK((influence_scores_vector(g, big).scores - sum).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("normalization") {
  const auto n = normalize_scores(raw(vec({4, 1, 0})));
  CHECK(n.scores == vec({1, 0.25, 0}));
  CHECK(n.normalized);
  const auto z = normalize_scores(raw(vec({0, 0})));
  CHECK(z.scores == vec({0, 0}));
  CHECK_FALSE(z.normalized);
  Rng rng(19);
  const Vector s = synth::normal_vector(rng, 20).cwiseAbs();
  Index before = 0, after = 0;
  s.maxCoeff(&before);
  normalize_scores(raw(s)).scores.maxCoeff(&after);
  CHECK(before == after);
  CHECK_THROWS_AS(normalize_scores(raw(vec({1, -1}))), Error);
}

TEST_CASE("resampling distribution and sampler") {
  CHECK(resampling_distribution(raw(vec({1, 1, 2}))) == vec({0.25, 0.25, 0.5}));
  CHECK(resampling_distribution(raw(vec({0, 3, 0}))) == vec({0, 1, 0}));
  CHECK_THROWS_AS(resampling_distribution(raw(vec({0, 0}))), Error);

  NodeSampler sampler(vec({0.25, 0.25, 0.5}), 2024);
  std::map<Index, int> counts;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[sampler.draw()];
  CHECK(std::abs(counts[0] / double(draws) - 0.25) <= 0.02);
  CHECK(std::abs(counts[1] / double(draws) - 0.25) <= 0.02);
  CHECK(std::abs(counts[2] / double(draws) - 0.5) <= 0.02);

  NodeSampler a(vec({0.1, 0.0, 0.6, 0.3, 0.0}), 5);
  NodeSampler b(vec({0.1, 0.0, 0.6, 0.3, 0.0}), 5);
  const auto picks = a.draw_without_replacement(5);
  CHECK(picks == b.draw_without_replacement(5));
  CHECK(std::set<Index>(picks.begin(), picks.end()).size() == 5);
  // positive mass is used up before the zero-probability nodes appear
  CHECK(std::set<Index>(picks.begin(), picks.begin() + 3) == std::set<Index>{0, 2, 3});
}

TEST_CASE("ranking helpers break ties by id") {
  CHECK(rank_descending(vec({1, 3, 3, 0})) == std::vector<Index>{1, 2, 0, 3});
  CHECK(rank_ascending(vec({1, 3, 3, 0})) == std::vector<Index>{3, 0, 1, 2});
}
