#include "fixtures.hpp"
#include "puprior/dataset.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

using namespace puprior;

namespace {

std::size_t count_hidden(const PUDataset& d) { return d.n_hidden_positives(); }

std::map<int, std::size_t> hidden_by_subclass(const PUDataset& d) {
  std::map<int, std::size_t> out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.pu_label[i] == 0 && (*d.true_label)[i] == 1) ++out[(*d.subclass)[i]];
  }
  return out;
}

std::map<int, std::size_t> labeled_by_subclass(const PUDataset& d) {
  std::map<int, std::size_t> out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.pu_label[i] == 1) ++out[(*d.subclass)[i]];
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

}  // namespace

TEST(Generator, HiddenCountAtTenPercent) {
  SyntheticConfig c;
  c.alpha_true = 0.10;
  c.seed = 0;
  const auto d = generate_scar(c);
  EXPECT_EQ(d.n_labeled(), 2000u);
  EXPECT_EQ(d.n_unlabeled(), 6000u);
  EXPECT_EQ(count_hidden(d), 600u);
  EXPECT_EQ(d.n_features(), 50u);
}

TEST(Generator, ZeroAlphaHasOnlyNegativesInUnlabeled) {
  const auto d = fixture::small_scar(0.0, 4);
  for (auto i : d.unlabeled_indices()) EXPECT_EQ((*d.true_label)[i], 0);
}

TEST(Generator, TwentyPercentAtLowSeparation) {
  SyntheticConfig c;
  c.alpha_true = 0.20;
  c.class_sep = 0.3;
  const auto d = generate_scar(c);
  EXPECT_EQ(count_hidden(d), 1200u);
  EXPECT_EQ(d.n_unlabeled() - count_hidden(d), 4800u);
}

TEST(Generator, RejectsInvalidConfigs) {
  SyntheticConfig c;
  c.alpha_true = 1.0;
  EXPECT_THROW(generate_scar(c), InputError);
  c.alpha_true = 0.1;
  c.n_positive = 0;
  EXPECT_THROW(generate_scar(c), InputError);
  c.n_positive = 100;
  c.class_sep = 0.0;
  EXPECT_THROW(generate_scar(c), InputError);
  c.class_sep = 1.0;
  c.n_subclasses = 1;
  c.subclass_mix = {1.0};
  EXPECT_THROW(generate_snar(c), InputError);
  c.n_subclasses = 2;
  c.subclass_mix = {0.3, 0.3};
  EXPECT_THROW(generate_snar(c), InputError);
}

TEST(Generator, SnarGeometricLayoutCounts) {
  auto c = fixture::desk_config(0.20, 0, true);
  const auto d = generate_snar(c);
  const auto hidden = hidden_by_subclass(d);
  const std::vector<std::size_t> expected{39, 77, 155, 310, 619};
  for (int s = 1; s <= 5; ++s) EXPECT_EQ(hidden.at(s), expected[s - 1]) << "subclass " << s;
  for (const auto& [s, n] : labeled_by_subclass(d)) EXPECT_EQ(n, 400u) << "subclass " << s;
}

TEST(Generator, SnarOnePercentTotal) {
  auto c = fixture::desk_config(0.01, 0, true);
  const auto d = generate_snar(c);
  const auto n = count_hidden(d);
  EXPECT_NEAR(static_cast<double>(n), 61.0, 1.0);
  // Rounding each subclass share on its own lands within one of the same total.
  const auto mix = geometric_mix(5);
  double per_part = 0;
  for (double m : mix) per_part += std::round(0.01 * 6000.0 * m);
  EXPECT_NEAR(static_cast<double>(n), per_part, 1.0);
  EXPECT_EQ(n, round_count(0.01 * 6000.0));
}

TEST(Generator, UniformMixMatchesLabeledRatios) {
  SyntheticConfig c;
  c.n_positive = 1000;
  c.n_unlabeled = 3000;
  c.n_features = 10;
  c.n_subclasses = 2;
  c.subclass_mix = {0.5, 0.5};
  c.alpha_true = 0.2;
  const auto d = generate_snar(c);
  const auto hidden = hidden_by_subclass(d);
  const auto labeled = labeled_by_subclass(d);
  EXPECT_EQ(hidden.at(1), hidden.at(2));
  EXPECT_EQ(labeled.at(1), labeled.at(2));
}

TEST(Generator, HiddenCountEqualsLargestRemainder) {
  for (double alpha : {0.013, 0.05, 0.137, 0.3, 0.77}) {
    auto c = fixture::desk_config(alpha, 1, true);
    c.n_features = 5;
    const auto d = generate_snar(c);
    const auto parts = largest_remainder(round_count(alpha * 6000.0), geometric_mix(5));
    const auto hidden = hidden_by_subclass(d);
    for (int s = 1; s <= 5; ++s) {
      const auto it = hidden.find(s);
      EXPECT_EQ(it == hidden.end() ? 0u : it->second, parts[s - 1]) << alpha;
    }
  }
}

TEST(Generator, DeterministicGivenSeed) {
  const auto a = fixture::small_scar(0.2, 9);
  const auto b = fixture::small_scar(0.2, 9);
  const auto c = fixture::small_scar(0.2, 10);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.pu_label, b.pu_label);
  EXPECT_NE(a.features, c.features);
}

TEST(Generator, SnarLabeledAndHiddenMixesDiffer) {
  const auto d = generate_snar(fixture::desk_config(0.2, 2, true));
  const auto hidden = hidden_by_subclass(d);
  const auto labeled = labeled_by_subclass(d);
  // Chi-square of hidden counts against the labeled (uniform) proportions.
  double total_hidden = 0, total_labeled = 0;
  for (const auto& [s, n] : hidden) total_hidden += static_cast<double>(n);
  for (const auto& [s, n] : labeled) total_labeled += static_cast<double>(n);
  double chi2 = 0;
  for (const auto& [s, n] : labeled) {
    const double expected = total_hidden * static_cast<double>(n) / total_labeled;
    const double observed = static_cast<double>(hidden.at(s));
    chi2 += (observed - expected) * (observed - expected) / expected;
  }
  EXPECT_GT(chi2, 100.0);
}

TEST(LargestRemainder, SplitsExactly) {
  const auto parts = largest_remainder(10, {0.25, 0.25, 0.5});
  EXPECT_EQ(parts, (std::vector<std::size_t>{3, 2, 5}));
  EXPECT_EQ(std::accumulate(parts.begin(), parts.end(), std::size_t{0}), 10u);
}

TEST(FlipCount, MatchesFractionFormula) {
  EXPECT_EQ(flip_count(25139, 0.01), 254u);
  EXPECT_EQ(flip_count(900, 0.1), 100u);
}

TEST(FlipToUnlabeled, ScarHitsRequestedFraction) {
  auto truth = fixture::small_scar(0.0, 3, 500, 400);
  truth.pu_label = *truth.true_label;
  // All-positive pool of 500 against 400 negatives; 20% hidden needs 100.
  const auto d = flip_to_unlabeled(truth, 0.2, LabelMode::kScar, 1);
  EXPECT_EQ(d.n_hidden_positives(), 100u);
  EXPECT_EQ(d.n_unlabeled(), 500u);
  EXPECT_THROW(flip_to_unlabeled(truth, 0.6, LabelMode::kScar, 1), InputError);
}

TEST(FlipToUnlabeled, SnarDrawsMinorShareAndSplitsMajorsEqually) {
  SyntheticConfig c;
  c.n_positive = 1000;
  c.n_unlabeled = 1000;
  c.n_features = 4;
  c.n_subclasses = 4;
  c.subclass_mix = {0.25, 0.25, 0.25, 0.25};
  c.alpha_true = 0.0;
  auto truth = generate_snar(c);
  // Make subclass sizes unequal: relabel so sizes are 100, 150, 300, 450.
  std::size_t seen = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if ((*truth.true_label)[i] != 1) continue;
    (*truth.subclass)[i] = seen < 100 ? 1 : seen < 250 ? 2 : seen < 550 ? 3 : 4;
    ++seen;
  }
  truth.pu_label = *truth.true_label;
  const auto d = flip_to_unlabeled(truth, 0.2, LabelMode::kSnar, 5);
  const auto hidden = hidden_by_subclass(d);
  const std::size_t m = flip_count(1000, 0.2);
  EXPECT_EQ(d.n_hidden_positives(), m);
  // Minor classes 1 and 2 hold 250 of 1000 positives.
  EXPECT_EQ(hidden.at(1) + hidden.at(2), round_count(m * 0.25));
  const auto rest = m - round_count(m * 0.25);
  EXPECT_EQ(hidden.at(4), rest - rest / 2);
  EXPECT_EQ(hidden.at(3), rest / 2);
}

TEST(LoadCsv, OneHotIndicators) {
  fixture::TempDir dir("onehot");
  write_text(dir / "f.csv", "x,color,pu_label\n1.5,a,1\n2.5,b,0\n3.5,a,0\n");
  CsvOptions o;
  o.one_hot_columns = {"color"};
  const auto d = load_csv(dir / "f.csv", o);
  ASSERT_EQ(d.n_features(), 3u);
  const auto a = std::find(d.feature_names.begin(), d.feature_names.end(), "color=a") -
                 d.feature_names.begin();
  const auto b = std::find(d.feature_names.begin(), d.feature_names.end(), "color=b") -
                 d.feature_names.begin();
  ASSERT_LT(static_cast<std::size_t>(a), d.n_features());
  ASSERT_LT(static_cast<std::size_t>(b), d.n_features());
  EXPECT_EQ(d.features(0, a), 1.0);
  EXPECT_EQ(d.features(0, b), 0.0);
  EXPECT_EQ(d.features(1, a), 0.0);
  EXPECT_EQ(d.features(1, b), 1.0);
  EXPECT_EQ(d.features(2, a), 1.0);
  EXPECT_EQ(d.features(2, b), 0.0);
  EXPECT_EQ(d.pu_label, (Labels{1, 0, 0}));
}

TEST(LoadCsv, AllLabeledIsRejected) {
  fixture::TempDir dir("alllabeled");
  write_text(dir / "f.csv", "x,pu_label\n1,1\n2,1\n");
  EXPECT_THROW(load_csv(dir / "f.csv").validate(), InputError);
}

TEST(LoadCsv, ErrorsOnBadInput) {
  fixture::TempDir dir("badinput");
  EXPECT_THROW(load_csv(dir / "missing.csv"), InputError);
  write_text(dir / "f.csv", "x,pu_label\n1,1\nabc,0\n");
  EXPECT_THROW(load_csv(dir / "f.csv"), InputError);
  write_text(dir / "g.csv", "x,label\n1,1\n2,0\n");
  EXPECT_THROW(load_csv(dir / "g.csv"), InputError);
  write_text(dir / "h.csv", "x,pu_label\n1,1\n2,-1\n");
  EXPECT_THROW(load_csv(dir / "h.csv"), InputError);
}

TEST(LoadCsv, BankStyleFeatureCount) {
  const std::filesystem::path path = std::filesystem::path(PUPRIOR_TEST_DATA) / "bank_sample.csv";
  const std::vector<std::string> categorical{"job",     "marital", "education",
                                             "default", "housing", "loan",
                                             "contact", "month",   "poutcome"};
  // Count distinct values per categorical column straight from the text.
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) header.push_back(cell);
  }
  std::map<std::string, std::set<std::string>> distinct;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::size_t col = 0;
    for (std::string cell; std::getline(ss, cell, ','); ++col) distinct[header[col]].insert(cell);
  }
  std::size_t expected = 0;
  for (const auto& name : header) {
    if (name == "y") continue;
    const bool is_cat = std::find(categorical.begin(), categorical.end(), name) != categorical.end();
    expected += is_cat ? distinct[name].size() : 1;
  }
  ASSERT_EQ(header.size(), 17u);

  CsvOptions o;
  o.label_column = "y";
  o.one_hot_columns = categorical;
  const auto d = load_csv(path, o);
  EXPECT_EQ(d.n_features(), expected);
  EXPECT_EQ(d.n_features(), 35u);
  EXPECT_EQ(d.size(), 18u);
}

TEST(LoadCsv, RoundTripsWrittenDataset) {
  fixture::TempDir dir("roundtrip");
  const auto d = fixture::small_scar(0.1, 2, 30, 60, 3);
  write_csv(d, dir / "d.csv", {"generated for a test"});
  const auto back = load_csv(dir / "d.csv");
  EXPECT_EQ(back.pu_label, d.pu_label);
  ASSERT_TRUE(back.true_label);
  EXPECT_EQ(*back.true_label, *d.true_label);
  EXPECT_TRUE(back.features.isApprox(d.features, 1e-12));
}

TEST(Dataset, SubsetKeepsRowsInOrder) {
  const auto d = fixture::small_scar(0.1, 2, 30, 60, 3);
  const auto s = d.subset({5, 1, 40});
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s.pu_label[1], d.pu_label[1]);
  EXPECT_EQ(s.features.row(0), d.features.row(5));
  EXPECT_EQ(s.features.row(2), d.features.row(40));
}
