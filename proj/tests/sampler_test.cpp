#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "greedyvote/exact.hpp"
#include "greedyvote/sampler.hpp"
#include "test_support.hpp"

namespace gv = greedyvote;

namespace {

gv::SamplingDistribution dist(std::vector<double> w) {
  return gv::sampling_distribution(gv::WeightDistribution::from_raw(std::move(w)));
}

void expect_greedy_invariants(const gv::GreedySample& s, std::size_t k) {
  std::uint64_t total = 0;
  for (const auto& e : s.entries()) total += e.count;
  ASSERT_EQ(total, s.total_draws());
  ASSERT_EQ(s.distinct(), k);
  ASSERT_GE(s.total_draws(), k);
  // The k-th distinct node is the final draw and appears exactly once.
  ASSERT_EQ(s.entries().back().node, s.last_node());
  ASSERT_EQ(s.entries().back().count, 1u);
}

}  // namespace

TEST(GreedySample, SingleNodeQuorumTakesOneDraw) {
  const auto p = dist({0.7, 0.2, 0.1});
  gv::GreedySampler sampler(p);
  gv::RngStream rng(1, 1);
  for (int run = 0; run < 1000; ++run) {
    const auto s = sampler.sample(1, rng);
    ASSERT_EQ(s.total_draws(), 1u);
  }
}

TEST(GreedySample, FairCoinWaitingTimeMean) {
  const auto p = dist({0.5, 0.5});
  gv::GreedySampler sampler(p);
  gv::RngStream rng(99, 0);
  const int runs = 1000000;
  double sum = 0.0;
  gv::GreedySample s;
  for (int run = 0; run < runs; ++run) {
    sampler.sample_into(s, 2, rng);
    sum += static_cast<double>(s.total_draws());
  }
  EXPECT_NEAR(sum / runs, 3.0, 0.01);
}

TEST(GreedySample, InvariantsOnRandomInstances) {
  gv::RngStream meta(2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> w(2 + meta.uniform_index(30));
    for (double& x : w) x = 0.01 + meta.uniform01();
    const auto p = dist(w);
    gv::GreedySampler sampler(p);
    const std::size_t k = 1 + meta.uniform_index(w.size());
    gv::RngStream rng(3, static_cast<std::uint64_t>(trial));
    for (int run = 0; run < 200; ++run) expect_greedy_invariants(sampler.sample(k, rng), k);
  }
}

TEST(GreedySample, RejectsQuorumLargerThanSupport) {
  const auto p = dist({0.5, 0.0, 0.5});
  gv::RngStream rng(1, 1);
  EXPECT_THROW(gv::greedy_sample(p, 3, rng), gv::InvalidParameter);
  EXPECT_THROW(gv::greedy_sample(p, 0, rng), gv::InvalidParameter);
  EXPECT_NO_THROW(gv::greedy_sample(p, 2, rng));
}

TEST(GreedySample, Deterministic) {
  const auto p = dist({0.4, 0.3, 0.2, 0.1});
  gv::GreedySampler sampler(p);
  gv::RngStream a(8, 8), b(8, 8);
  for (int run = 0; run < 500; ++run) {
    const auto x = sampler.sample(3, a);
    const auto y = sampler.sample(3, b);
    ASSERT_EQ(x.total_draws(), y.total_draws());
    ASSERT_EQ(x.count(0), y.count(0));
  }
}

TEST(GreedySample, WaitingTimeMatchesExactLaw) {
  const auto p = dist({0.9, 0.1});
  const auto exact = gv::exact_v_distribution(p, 2, 400);
  gv::GreedySampler sampler(p);
  gv::RngStream rng(2718, 0);
  const int runs = 100000;
  std::vector<double> observed(exact.probs.size(), 0.0);
  for (int run = 0; run < runs; ++run) {
    const auto v = sampler.sample(2, rng).total_draws();
    if (v < observed.size()) observed[v] += 1.0;
  }
  const auto chi = gv::testing::chi_square_gof(observed, exact.probs, runs);
  EXPECT_TRUE(chi.passes()) << chi.statistic << " vs " << chi.critical << " (dof " << chi.dof << ")";
}

TEST(GreedySample, JointLawMatchesExactLaw) {
  const std::vector<double> w{0.4, 0.3, 0.2, 0.1};
  const auto p = dist(w);
  const std::size_t k = 3, node = 0, v_max = 60;
  const auto exact = gv::exact_joint_distribution(p, k, node, v_max);
  gv::GreedySampler sampler(p);
  gv::RngStream rng(31415, 0);
  const int runs = 100000;
  const std::size_t width = v_max + 1;
  std::vector<double> observed(width * width, 0.0), probs(width * width, 0.0);
  for (std::size_t v = 0; v <= v_max; ++v)
    for (std::size_t ell = 0; ell <= v; ++ell) probs[v * width + ell] = exact.probs[v][ell];
  for (int run = 0; run < runs; ++run) {
    const auto s = sampler.sample(k, rng);
    const auto v = s.total_draws();
    if (v <= v_max) observed[v * width + s.count(node)] += 1.0;
  }
  const auto chi = gv::testing::chi_square_gof(observed, probs, runs);
  EXPECT_TRUE(chi.passes()) << chi.statistic << " vs " << chi.critical << " (dof " << chi.dof << ")";
}

TEST(CoupledSample, DegenerateSplitKeepsSequencesIdentical) {
  const auto p = dist({0.5, 0.3, 0.2});
  gv::CoupledSampler sampler(p, {0, {1.0}});
  gv::RngStream rng(4, 4);
  for (int run = 0; run < 10000; ++run) {
    const auto c = sampler.sample(2, rng);
    ASSERT_EQ(c.extra_draws, 0u);
    ASSERT_EQ(c.extra_split_hits, 0u);
    ASSERT_EQ(c.pre.total_draws(), c.post.total_draws());
    ASSERT_EQ(c.pre.entries().size(), c.post.entries().size());
    for (std::size_t e = 0; e < c.pre.entries().size(); ++e) {
      ASSERT_EQ(c.pre.entries()[e].node, c.post.entries()[e].node);
      ASSERT_EQ(c.pre.entries()[e].count, c.post.entries()[e].count);
    }
  }
}

TEST(CoupledSample, InvariantsHoldEveryRun) {
  const auto p = dist({0.5, 0.5});
  gv::CoupledSampler sampler(p, {0, {0.5, 0.5}});
  const auto& map = sampler.index_map();
  gv::RngStream rng(5, 0);
  for (int run = 0; run < 100000; ++run) {
    const auto c = sampler.sample(2, rng);
    ASSERT_LE(c.post.total_draws(), c.pre.total_draws());
    ASSERT_LE(c.extra_split_hits, c.extra_draws);
    ASSERT_EQ(c.pre.total_draws(), c.post.total_draws() + c.extra_draws);
    std::uint64_t parts = 0;
    for (std::size_t j = 0; j < map.r; ++j) parts += c.post.count(map.part(j));
    ASSERT_EQ(c.pre.count(0), parts + c.extra_split_hits);
    ASSERT_EQ(c.post.count(map.map(1)), c.pre.count(1) - (c.extra_draws - c.extra_split_hits));
  }
}

TEST(CoupledSample, NonSplitNodesNeverGainInPost) {
  const auto p = gv::sampling_distribution(gv::zipf_weights({1.1, 30}));
  gv::CoupledSampler sampler(p, gv::SplitSpec::equal(0, 3));
  const auto& map = sampler.index_map();
  gv::RngStream rng(6, 0);
  for (int run = 0; run < 20000; ++run) {
    const auto c = sampler.sample(5, rng);
    for (const auto& e : c.pre.entries()) {
      if (e.node == 0) continue;
      ASSERT_GE(e.count, c.post.count(map.map(e.node)));
    }
    for (const auto& e : c.post.entries()) {
      if (map.is_part(e.node)) continue;
      // Every non-split node in post also appears in pre.
      ASSERT_GT(c.pre.count(e.node < map.first ? e.node : e.node - (map.r - 1)), 0u);
    }
  }
}

TEST(CoupledSample, NoSplitNodeBeforeQuorumMeansNoDifference) {
  const auto p = gv::sampling_distribution(gv::zipf_weights({0.8, 50}));
  gv::CoupledSampler sampler(p, gv::SplitSpec::equal(0, 2));
  gv::RngStream rng(7, 0);
  int seen = 0;
  for (int run = 0; run < 20000; ++run) {
    const auto c = sampler.sample(4, rng);
    const bool split_node_before_last = c.pre.count(0) > 0 && !(c.pre.last_node() == 0 && c.pre.count(0) == 1);
    if (!split_node_before_last) {
      ++seen;
      ASSERT_EQ(c.extra_draws, 0u);
      ASSERT_EQ(c.extra_split_hits, 0u);
    }
  }
  EXPECT_GT(seen, 100);
}

TEST(CoupledSample, RequiresIdentitySampling) {
  const auto w = gv::WeightDistribution::from_raw({0.6, 0.4});
  const auto p = gv::sampling_distribution(w, gv::WeightFunction::constant_one());
  EXPECT_THROW(gv::CoupledSampler(p, {0, {0.5, 0.5}}), gv::UnsupportedConfiguration);
}

// Each side of the coupling, viewed alone, is an ordinary greedy sample of its own distribution.
TEST(CoupledSample, MarginalsMatchIndependentSamplers) {
  const auto w = gv::WeightDistribution::from_raw({0.45, 0.25, 0.15, 0.1, 0.05});
  const auto p = gv::sampling_distribution(w);
  const gv::SplitSpec split{0, {0.3, 0.7}};
  const auto [split_w, map] = gv::apply_split(w, split);
  const auto q = gv::sampling_distribution(split_w);
  gv::CoupledSampler coupled(p, split);
  gv::GreedySampler pre_alone(p), post_alone(q);
  gv::RngStream r1(10, 0), r2(10, 1), r3(10, 2);
  const int runs = 100000;
  const std::size_t k = 3, bins = 80;
  std::vector<double> pre_c(bins, 0.0), post_c(bins, 0.0), pre_i(bins, 0.0), post_i(bins, 0.0);
  auto bump = [&](std::vector<double>& h, std::uint64_t v) { h[std::min<std::uint64_t>(v, bins - 1)] += 1.0; };
  for (int run = 0; run < runs; ++run) {
    const auto c = coupled.sample(k, r1);
    bump(pre_c, c.pre.total_draws());
    bump(post_c, c.post.total_draws());
    bump(pre_i, pre_alone.sample(k, r2).total_draws());
    bump(post_i, post_alone.sample(k, r3).total_draws());
  }
  const auto chi_pre = gv::testing::chi_square_two_sample(pre_c, pre_i);
  const auto chi_post = gv::testing::chi_square_two_sample(post_c, post_i);
  EXPECT_TRUE(chi_pre.passes()) << chi_pre.statistic << " vs " << chi_pre.critical;
  EXPECT_TRUE(chi_post.passes()) << chi_post.statistic << " vs " << chi_post.critical;
}
