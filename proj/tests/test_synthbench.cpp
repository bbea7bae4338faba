#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "modclust/corrmat.hpp"
#include "modclust/evalkit.hpp"
#include "modclust/hac.hpp"
#include "modclust/synthbench.hpp"
#include "oracles.hpp"

using namespace modclust;
using synthbench::BenchConfig;

TEST_CASE("a benchmark config is reproduced bit for bit") {
  BenchConfig cfg;
  cfg.n_genes = 24;
  cfg.n_modules = 3;
  cfg.m_samples = 15;
  cfg.p_corrupt = 0.4;
  cfg.latent_coupling = 0.5;
  cfg.seed = 777;
  auto a = synthbench::generate_benchmark(cfg);
  auto b = synthbench::generate_benchmark(cfg);
  CHECK(a.expr.genes() == b.expr.genes());
  CHECK(a.expr.samples() == b.expr.samples());
  CHECK(a.expr.values() == b.expr.values());
  CHECK(a.edges == b.edges);
  CHECK(oracles::canonical(a.truth) == oracles::canonical(b.truth));
  REQUIRE(a.priors.clusters().size() == b.priors.clusters().size());
  for (std::size_t j = 0; j < a.priors.clusters().size(); ++j) {
    CHECK(a.priors.clusters()[j].name == b.priors.clusters()[j].name);
    CHECK(a.priors.clusters()[j].members == b.priors.clusters()[j].members);
  }

  cfg.seed = 778;
  auto c = synthbench::generate_benchmark(cfg);
  CHECK(a.expr.values() != c.expr.values());
}

TEST_CASE("genes split into near-equal consecutive modules") {
  BenchConfig cfg;
  cfg.n_genes = 10;
  cfg.n_modules = 3;
  cfg.m_samples = 10;
  auto bench = synthbench::generate_benchmark(cfg);
  REQUIRE(bench.truth.size() == 3);
  CHECK(bench.truth.modules()[0].members.size() == 4);
  CHECK(bench.truth.modules()[1].members.size() == 3);
  CHECK(bench.truth.modules()[2].members.size() == 3);
  CHECK(bench.expr.genes().front() == "G01");
  CHECK(bench.expr.genes().back() == "G10");
  CHECK(bench.truth.modules()[0].members ==
        std::vector<GeneId>{"G01", "G02", "G03", "G04"});
  CHECK(bench.edges.size() == 10);
  CHECK(bench.edges.front().first == "R1");
}

TEST_CASE("noiseless uncoupled data is perfectly recoverable") {
  BenchConfig cfg;
  cfg.n_genes = 30;
  cfg.n_modules = 3;
  cfg.m_samples = 30;
  cfg.sigma = 0.0;
  cfg.seed = 5;
  auto bench = synthbench::generate_benchmark(cfg);

  corrmat::MetricConfig mc;
  mc.metric = MetricTag::PCC;
  auto S = corrmat::build_correlation_matrix(bench.expr, mc);

  // rows 0 and 1 sit in the first module: exact positive multiples
  CHECK(S.values()(0, 1) == doctest::Approx(1.0).epsilon(1e-12));

  auto tree = hac::single_linkage(S);
  auto sweep = hac::threshold_sweep(tree, 0.01);
  auto best = evalkit::best_f(sweep, bench.truth);
  CHECK(best.prf.f == 1.0);
  CHECK(oracles::canonical(hac::cut(tree, best.eps)) ==
        oracles::canonical(bench.truth));
  // clean separation puts the whole curve on the axes
  CHECK(evalkit::auc(evalkit::roc(sweep, bench.truth)) == 1.0);
}

TEST_CASE("the edge list regenerates the truth as a strict standard") {
  BenchConfig cfg;
  cfg.n_genes = 37;
  cfg.n_modules = 4;
  cfg.m_samples = 12;
  cfg.p_corrupt = 0.7;
  cfg.seed = 99;
  auto bench = synthbench::generate_benchmark(cfg);
  CHECK(oracles::canonical(evalkit::strict_modules(bench.edges)) ==
        oracles::canonical(bench.truth));
  auto minimal = evalkit::minimal_modules(bench.edges);
  CHECK(oracles::canonical(minimal) == oracles::canonical(bench.truth));
}

TEST_CASE("uncorrupted priors equal the truth") {
  BenchConfig cfg;
  cfg.n_genes = 20;
  cfg.n_modules = 4;
  cfg.m_samples = 10;
  cfg.p_corrupt = 0.0;
  auto bench = synthbench::generate_benchmark(cfg);
  REQUIRE(bench.priors.clusters().size() == 4);
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(bench.priors.clusters()[j].members ==
          bench.truth.modules()[j].members);
}

TEST_CASE("corruption permutes occupants without changing sizes") {
  BenchConfig cfg;
  cfg.n_genes = 21;
  cfg.n_modules = 3;
  cfg.m_samples = 10;
  cfg.p_corrupt = 0.5;
  cfg.seed = 31;
  auto bench = synthbench::generate_benchmark(cfg);
  std::vector<GeneId> prior_all, truth_all;
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(bench.priors.clusters()[j].members.size() ==
          bench.truth.modules()[j].members.size());
    for (const auto& g : bench.priors.clusters()[j].members)
      prior_all.push_back(g);
    for (const auto& g : bench.truth.modules()[j].members)
      truth_all.push_back(g);
  }
  std::sort(prior_all.begin(), prior_all.end());
  std::sort(truth_all.begin(), truth_all.end());
  CHECK(prior_all == truth_all);
}

TEST_CASE("full corruption of two equal modules shares about half") {
  BenchConfig cfg;
  cfg.n_genes = 40;
  cfg.n_modules = 2;
  cfg.m_samples = 10;
  cfg.p_corrupt = 1.0;
  double share_sum = 0.0;
  const int n_seeds = 120;
  for (int s = 0; s < n_seeds; ++s) {
    cfg.seed = static_cast<std::uint64_t>(1000 + s);
    auto bench = synthbench::generate_benchmark(cfg);
    for (std::size_t j = 0; j < 2; ++j) {
      std::set<GeneId> truth(bench.truth.modules()[j].members.begin(),
                             bench.truth.modules()[j].members.end());
      std::size_t hits = 0;
      for (const auto& g : bench.priors.clusters()[j].members)
        if (truth.count(g)) ++hits;
      share_sum += static_cast<double>(hits) /
                   static_cast<double>(bench.truth.modules()[j].members.size());
    }
  }
  const double mean_share = share_sum / (2.0 * n_seeds);
  CHECK(mean_share > 0.4);
  CHECK(mean_share < 0.6);
}

TEST_CASE("invalid benchmark configs are rejected") {
  auto check_throws = [](auto mutate) {
    BenchConfig cfg;
    cfg.n_genes = 20;
    cfg.n_modules = 4;
    cfg.m_samples = 12;
    mutate(cfg);
    CHECK_THROWS_AS(synthbench::generate_benchmark(cfg), ValidationError);
  };
  check_throws([](BenchConfig& c) { c.n_modules = 1; });
  check_throws([](BenchConfig& c) { c.n_genes = 7; });
  check_throws([](BenchConfig& c) { c.m_samples = 9; });
  check_throws([](BenchConfig& c) { c.sigma = -0.1; });
  check_throws([](BenchConfig& c) { c.p_corrupt = 1.5; });
  check_throws([](BenchConfig& c) { c.p_corrupt = -0.1; });
  check_throws([](BenchConfig& c) { c.latent_coupling = 1.0; });
  check_throws([](BenchConfig& c) { c.loading_lo = 0.0; });
  check_throws([](BenchConfig& c) {
    c.loading_lo = 2.0;
    c.loading_hi = 1.0;
  });
}
