#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "seqknock/multi_knockoff.hpp"
#include "seqknock/numeric.hpp"

using namespace seqknock;

namespace {

// Reference consensus by exhaustive enumeration of candidate subsets.
IndexSet brute_mode(const std::vector<IndexSet>& sets, const IndexSet& frequent) {
  const std::size_t f = frequent.size();
  IndexSet best;
  long best_count = -1;
  for (std::size_t mask = 0; mask < (std::size_t{1} << f); ++mask) {
    IndexSet cand;
    for (std::size_t k = 0; k < f; ++k)
      if (mask >> k & 1) cand.push_back(frequent[k]);
    long count = 0;
    for (const auto& s : sets) {
      IndexSet inter;
      std::set_intersection(s.begin(), s.end(), frequent.begin(), frequent.end(), std::back_inserter(inter));
      count += inter == cand;
    }
    if (count == 0) continue;
    const bool better = count > best_count ||
                        (count == best_count && (cand.size() > best.size() || (cand.size() == best.size() && cand < best)));
    if (better) {
      best = cand;
      best_count = count;
    }
  }
  return best;
}

IndexSet brute_frequent(const std::vector<IndexSet>& sets, std::size_t p, double r) {
  IndexSet out;
  for (std::size_t j = 0; j < p; ++j) {
    std::size_t c = 0;
    for (const auto& s : sets) c += std::count(s.begin(), s.end(), j);
    // counts are integers, so compare against r B with a half-ulp style margin
    if (static_cast<double>(c) > r * static_cast<double>(sets.size()) + 1e-9) out.push_back(j);
  }
  return out;
}

}  // namespace

TEST(Consensus, HandExample) {
  const auto m = SelectionMatrix::from_sets({{0, 1}, {0, 1}, {0, 1, 2}, {0}}, 3);
  EXPECT_EQ(m.counts(), (std::vector<int>{4, 3, 1}));
  EXPECT_EQ(filter_frequent(m, 0.5), (IndexSet{0, 1}));
  EXPECT_EQ(filter_frequent(m, 0.75), (IndexSet{0}));
  const auto c = consensus_select(m);
  EXPECT_EQ(c.selected, (IndexSet{0, 1}));
  EXPECT_DOUBLE_EQ(c.r_hat, 0.5);
  EXPECT_EQ(c.frequency, (std::vector<double>{1.0, 0.75, 0.25}));
}

TEST(Consensus, FrequencyThresholdIsStrict) {
  // count 2 of B = 4 is exactly r B at r = 0.5 and must be excluded.
  const auto m = SelectionMatrix::from_sets({{0, 1}, {0, 1}, {0}, {0}}, 2);
  EXPECT_EQ(filter_frequent(m, 0.5), (IndexSet{0}));
  // count 7 of B = 10 sits on the boundary at r = 0.7
  std::vector<IndexSet> ten(10, IndexSet{});
  for (int b = 0; b < 7; ++b) ten[static_cast<std::size_t>(b)] = {0};
  EXPECT_TRUE(filter_frequent(SelectionMatrix::from_sets(ten, 1), 0.7).empty());
  EXPECT_EQ(filter_frequent(SelectionMatrix::from_sets(ten, 1), 0.65), (IndexSet{0}));
}

TEST(Consensus, UnanimousDrawsReturnThatSet) {
  const std::vector<IndexSet> sets(7, IndexSet{1, 3, 4});
  const auto c = consensus_select(SelectionMatrix::from_sets(sets, 6));
  EXPECT_EQ(c.selected, (IndexSet{1, 3, 4}));
}

TEST(Consensus, EmptyDrawsGiveEmptySelection) {
  const std::vector<IndexSet> sets(5, IndexSet{});
  const auto c = consensus_select(SelectionMatrix::from_sets(sets, 4));
  EXPECT_TRUE(c.selected.empty());
  EXPECT_DOUBLE_EQ(c.r_hat, 0.5);
}

TEST(Consensus, DefaultGrid) {
  const auto g4 = default_r_grid(4);
  EXPECT_EQ(g4.size(), 11u);
  EXPECT_DOUBLE_EQ(g4.front(), 0.5);
  EXPECT_DOUBLE_EQ(g4.back(), 1.0);
  const auto g100 = default_r_grid(100);  // step 1/200
  EXPECT_EQ(g100.size(), 101u);
  EXPECT_NEAR(g100[1], 0.505, 1e-15);
  const auto g1 = default_r_grid(1);
  EXPECT_DOUBLE_EQ(g1.back(), 1.0);
}

TEST(Consensus, RejectsBadGrids) {
  const auto m = SelectionMatrix::from_sets({{0}}, 1);
  EXPECT_THROW(consensus_select(m, {0.4, 0.6}), InvalidArgument);
  EXPECT_THROW(consensus_select(m, {0.7, 0.6}), InvalidArgument);
  EXPECT_THROW(consensus_select(SelectionMatrix::from_sets({}, 2)), InvalidArgument);
  EXPECT_THROW(SelectionMatrix::from_sets({{3}}, 2), InvalidArgument);
}

TEST(Consensus, MatchesBruteForceEnumeration) {
  SeededStream rng(301, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t p = 1 + rng.index(10);
    const std::size_t b = 1 + rng.index(20);
    std::vector<double> rate(p);
    for (auto& v : rate) v = rng.uniform();
    std::vector<IndexSet> sets(b);
    for (auto& s : sets)
      for (std::size_t j = 0; j < p; ++j)
        if (rng.uniform() < rate[j]) s.push_back(j);
    const auto m = SelectionMatrix::from_sets(sets, p);
    const auto grid = default_r_grid(b);
    const auto c = consensus_select(m);
    ASSERT_EQ(c.trace.size(), grid.size());
    IndexSet best;
    double r_hat = 0.5;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto f = brute_frequent(sets, p, grid[k]);
      ASSERT_EQ(c.trace[k].frequent, f) << "rep " << rep << " r " << grid[k];
      const auto mode = brute_mode(sets, f);
      ASSERT_EQ(c.trace[k].consensus, mode) << "rep " << rep << " r " << grid[k];
      if (k == 0 || mode.size() > best.size()) {
        best = mode;
        r_hat = grid[k];
      }
    }
    ASSERT_EQ(c.selected, best);
    ASSERT_EQ(c.r_hat, r_hat);
  }
}

TEST(Consensus, FrequentSetsShrinkAndContainConsensus) {
  SeededStream rng(302, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t p = 12, b = 30;
    std::vector<IndexSet> sets(b);
    for (auto& s : sets)
      for (std::size_t j = 0; j < p; ++j)
        if (rng.uniform() < 0.1 + 0.07 * static_cast<double>(j)) s.push_back(j);
    const auto c = consensus_select(SelectionMatrix::from_sets(sets, p));
    for (std::size_t k = 0; k < c.trace.size(); ++k) {
      const auto& step = c.trace[k];
      EXPECT_TRUE(std::includes(step.frequent.begin(), step.frequent.end(), step.consensus.begin(),
                                step.consensus.end()));
      if (k > 0) {
        const auto& prev = c.trace[k - 1].frequent;
        EXPECT_TRUE(std::includes(prev.begin(), prev.end(), step.frequent.begin(), step.frequent.end()));
      }
    }
  }
}

TEST(Heatmap, TwoByTwoExport) {
  auto m = SelectionMatrix::from_sets({{1}, {0, 1}}, 2);
  m.variable_names = {"a", "b"};
  const auto h = export_heatmap(m);
  EXPECT_EQ(h.order, (std::vector<std::size_t>{1, 0}));
  std::ostringstream csv, freq;
  write_heatmap_csv(csv, h);
  write_frequency_csv(freq, h, m.variable_names);
  EXPECT_EQ(csv.str(), "variable,draw,selected\nb,0,1\nb,1,1\na,0,0\na,1,1\n");
  EXPECT_EQ(freq.str(), "variable,freq\nb,1\na,0.5\n");
  const auto in = export_heatmap(m, HeatmapOrder::input);
  EXPECT_EQ(in.order, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(in.rows.front().variable, "a");
}

TEST(Heatmap, RowCountAndReconstruction) {
  SeededStream rng(303, 0);
  std::vector<IndexSet> sets(9);
  for (auto& s : sets)
    for (std::size_t j = 0; j < 5; ++j)
      if (rng.uniform() < 0.4) s.push_back(j);
  const auto m = SelectionMatrix::from_sets(sets, 5);
  const auto h = export_heatmap(m);
  ASSERT_EQ(h.rows.size(), 45u);
  for (const auto& row : h.rows) {
    const std::size_t j = static_cast<std::size_t>(std::stoi(row.variable.substr(1))) - 1;
    EXPECT_EQ(row.selected, m.indicators(static_cast<Index>(row.draw), static_cast<Index>(j)));
  }
  for (std::size_t k = 1; k < h.order.size(); ++k) EXPECT_GE(h.frequency[h.order[k - 1]], h.frequency[h.order[k]]);
}

namespace {

MixedDataMatrix signal_table(SeededStream& s, Index n, Index p, Vector* y) {
  const Matrix x = sample_mvn(s, Vector::Zero(p), Matrix::Identity(p, p), n);
  *y = Vector::Zero(n);
  for (Index j = 0; j < 6; ++j) *y += 1.2 * x.col(j);
  for (Index i = 0; i < n; ++i) (*y)(i) += s.normal();
  return from_matrix(x);
}

}  // namespace

TEST(RunMulti, SingleDrawReproducesTheFilter) {
  SeededStream s(310, 0);
  Vector y;
  const auto x = signal_table(s, 150, 10, &y);
  const auto m = run_multi(x, y, 0.2, 1, GeneratorKind::gaussian, 77);
  SeededStream fs = SeededStream::for_draw(77, 0, 0);
  const auto f = run_filter(x, y, 0.2, GeneratorKind::gaussian, fs);
  EXPECT_EQ(m.row_set(0), f.selection.selected);
  EXPECT_EQ(m.draw_stream_ids[0], fs.stream_id());
}

TEST(RunMulti, ThreadCountDoesNotChangeResults) {
  SeededStream s(311, 0);
  Vector y;
  const auto x = signal_table(s, 120, 8, &y);
  MultiOptions one, four;
  four.threads = 4;
  const auto a = run_multi(x, y, 0.2, 12, GeneratorKind::gaussian, 5, one);
  const auto b = run_multi(x, y, 0.2, 12, GeneratorKind::gaussian, 5, four);
  EXPECT_EQ(a.indicators, b.indicators);
  EXPECT_EQ(a.draw_stream_ids, b.draw_stream_ids);
  // draws must differ from each other: distinct streams
  EXPECT_NE(a.draw_stream_ids[0], a.draw_stream_ids[1]);
}

TEST(RunMulti, ReplicateSelectsDisjointStreams) {
  SeededStream s(312, 0);
  Vector y;
  const auto x = signal_table(s, 80, 6, &y);
  MultiOptions opt;
  opt.replicate = 3;
  const auto m = run_multi(x, y, 0.2, 2, GeneratorKind::gaussian, 5, opt);
  EXPECT_EQ(m.draw_stream_ids[1], (std::uint64_t{3} << SeededStream::kDrawBits) + 1);
  EXPECT_THROW(run_multi(x, y, 0.2, 0, GeneratorKind::gaussian, 5), InvalidArgument);
}

TEST(RunMulti, NumericalFailuresAreRecordedAsEmptyRows) {
  // identical columns trip the collinearity guard on every draw and retry
  Vector z(40);
  SeededStream s(313, 0);
  for (Index i = 0; i < 40; ++i) z(i) = s.normal();
  const MixedDataMatrix x({{"a", ContinuousColumn{z}}, {"b", ContinuousColumn{z}}, {"c", ContinuousColumn{-z}}});
  const auto m = run_multi(x, z, 0.2, 3, GeneratorKind::sequential, 1);
  EXPECT_EQ(m.failed, (std::vector<char>{1, 1, 1}));
  EXPECT_EQ(m.indicators.sum(), 0);
}
