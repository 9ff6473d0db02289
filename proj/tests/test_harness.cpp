#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <string>

#include "eivtls/error.hpp"
#include "eivtls/harness.hpp"

using namespace eivtls;
using namespace eivtls::harness;

namespace {

ExperimentConfig small_config(double sigma) {
  ExperimentConfig c;
  c.spec.n = 4;
  c.spec.ell = 1;
  c.spec.k = 1;
  c.spec.r = 3;
  c.spec.sigma = sigma;
  c.spec.seed = 3;
  c.m_schedule = {20, 60, 200};
  c.replicates = 4;
  return c;
}

Row ok_row(Index m, Index rep, double sin_max) {
  Row r;
  r.experiment = "consistency";
  r.m = m;
  r.replicate = rep;
  r.sin_max = sin_max;
  r.x_error = sin_max;
  r.rank = 3;
  return r;
}

struct ScopedEnv {
  ScopedEnv(const char* name, const char* value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    ::setenv(name, value, 1);
  }
  ~ScopedEnv() {
    if (old_.empty()) ::unsetenv(name_);
    else ::setenv(name_, old_.c_str(), 1);
  }
  const char* name_;
  std::string old_;
};

}  // namespace

TEST(Consistency, NoiselessRowsAreExact) {
  const ConvergenceReport rep = run_consistency_experiment(small_config(0.0));
  ASSERT_EQ(rep.rows.size(), 12u);
  EXPECT_EQ(rep.excluded, 0);
  for (const Row& r : rep.rows) {
    EXPECT_TRUE(r.ok()) << r.status;
    EXPECT_LE(r.sin_max, 1e-8);
    EXPECT_LE(r.x_error, 1e-8);
    EXPECT_EQ(r.rank, 3);
    EXPECT_TRUE(std::isnan(r.dk_lhs));
  }
}

TEST(Consistency, DeterministicAcrossThreadCounts) {
  const ExperimentConfig c = small_config(0.1);
  std::string one, many;
  {
    ScopedEnv env("EIV_TLS_THREADS", "1");
    EXPECT_EQ(worker_count(), 1u);
    one = rows_to_csv(run_consistency_experiment(c).rows);
  }
  {
    ScopedEnv env("EIV_TLS_THREADS", "3");
    EXPECT_EQ(worker_count(), 3u);
    many = rows_to_csv(run_consistency_experiment(c).rows);
  }
  EXPECT_EQ(one, many);
  EXPECT_EQ(one, rows_to_csv(run_consistency_experiment(c).rows));
}

TEST(Consistency, ExtendingScheduleKeepsEarlierRows) {
  ExperimentConfig c = small_config(0.1);
  c.m_schedule = {20, 60};
  const auto short_run = run_consistency_experiment(c);
  c.m_schedule = {20, 60, 200};
  const auto long_run = run_consistency_experiment(c);
  for (const Row& a : short_run.rows) {
    bool found = false;
    for (const Row& b : long_run.rows) {
      if (b.m == a.m && b.replicate == a.replicate) {
        found = true;
        EXPECT_EQ(rows_to_csv({a}), rows_to_csv({b}));
      }
    }
    EXPECT_TRUE(found);
  }
}

TEST(Consistency, DaviesKahanEvaluatedWithNoise) {
  const ConvergenceReport rep = run_consistency_experiment(small_config(0.05));
  for (const MSummary& s : rep.per_m) {
    EXPECT_EQ(s.dk_evaluated, s.rows - s.excluded);
    EXPECT_EQ(s.dk_violations, 0);
  }
}

TEST(Inclusion, NoiselessContainment) {
  ExperimentConfig c = small_config(0.0);
  c.spec.k = 0;
  c.spec.r_inf = 2;
  const ConvergenceReport rep = run_inclusion_experiment(c);
  for (const Row& r : rep.rows) {
    EXPECT_TRUE(r.ok()) << r.status;
    EXPECT_EQ(r.rank, 2);
    EXPECT_LE(r.sin_max, 1e-8);
  }
}

TEST(Misspecification, NoiselessBothExact) {
  ExperimentConfig c = small_config(0.0);
  c.spec.coupling = model::ExactRowCoupling::Disjoint;
  const ConvergenceReport rep = misspecification_demo(c);
  for (const Row& r : rep.rows) {
    EXPECT_TRUE(r.ok()) << r.status;
    EXPECT_LE(r.x_error, 1e-8);
    EXPECT_LE(r.tls_error, 1e-8);
  }
}

TEST(Slln, ZeroWeightsGiveZero) {
  SllnConfig c;
  c.alpha = AlphaKind::Zero;
  c.m_schedule = {10, 1000};
  c.seeds = 4;
  for (const Row& r : slln_demo(c).rows) {
    EXPECT_EQ(r.slln_value, 0.0);
    EXPECT_EQ(r.alpha_sq_mean, 0.0);
  }
}

TEST(Slln, UnitAndAlternatingWeightsShrink) {
  for (AlphaKind kind : {AlphaKind::One, AlphaKind::Alternating}) {
    SllnConfig c;
    c.alpha = kind;
    c.m_schedule = {100, 1'000'000};
    c.seeds = 32;
    c.seed = 9;
    const ConvergenceReport rep = slln_demo(c);
    const auto med = rep.medians("slln_value");
    ASSERT_EQ(med.size(), 2u);
    EXPECT_LT(med[1], 0.005);
    EXPECT_LT(med[1], med[0]);
    EXPECT_DOUBLE_EQ(rep.at(1'000'000).metrics.at("alpha_sq_mean").median, 1.0);
  }
}

TEST(Summarize, TypeSevenQuantiles) {
  std::vector<Row> rows;
  for (Index i = 0; i < 4; ++i) rows.push_back(ok_row(10, i, double(i + 1)));
  const auto rep = summarize("consistency", rows);
  const MetricStats& st = rep.at(10).metrics.at("sin_max");
  EXPECT_EQ(st.count, 4);
  EXPECT_DOUBLE_EQ(st.median, 2.5);
  EXPECT_DOUBLE_EQ(st.q1, 1.75);
  EXPECT_DOUBLE_EQ(st.q3, 3.25);
}

TEST(Summarize, FailedRowsExcluded) {
  std::vector<Row> rows;
  for (Index i = 0; i < 5; ++i) rows.push_back(ok_row(10, i, 1.0));
  Row bad = ok_row(10, 5, std::nan(""));
  bad.status = "NotGeneric";
  rows.push_back(bad);
  rows.push_back(ok_row(20, 0, 0.5));
  const auto rep = summarize("consistency", rows);
  EXPECT_EQ(rep.excluded, 1);
  EXPECT_EQ(rep.at(10).rows, 6);
  EXPECT_EQ(rep.at(10).excluded, 1);
  EXPECT_EQ(rep.at(10).metrics.at("sin_max").count, 5);
  EXPECT_DOUBLE_EQ(rep.at(10).metrics.at("sin_max").median, 1.0);
  EXPECT_EQ(rep.at(20).excluded, 0);
  EXPECT_NE(summary_json(rep).find("\"excluded\""), std::string::npos);
}

TEST(RowsCsv, RoundTripPreservesSummary) {
  const ConvergenceReport rep = run_consistency_experiment(small_config(0.1));
  const std::string csv = rows_to_csv(rep.rows);
  const auto parsed = rows_from_csv(csv);
  EXPECT_EQ(rows_to_csv(parsed), csv);
  EXPECT_EQ(summary_json(summarize(rep.experiment, parsed)), summary_json(rep));
}

TEST(RowsCsv, MalformedInput) {
  for (const char* text : {"", "not,a,header\n", "experiment\n"}) {
    try {
      rows_from_csv(text);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::MalformedInput);
    }
  }
  std::string csv = rows_to_csv({ok_row(10, 0, 1.0)});
  csv.pop_back();
  csv += ",extra\n";
  EXPECT_THROW(rows_from_csv(csv), Error);
}

TEST(Config, ParsesAllFields) {
  const auto c = config_from_json(R"({"n": 6, "ell": 2, "k": 2, "r": 4, "r_inf": 3, "sigma": 0.1,
      "noise": "uniform", "seed": 5, "m_schedule": [100, 1000], "replicates": 8,
      "rank_mode": "auto", "out_prefix": "x"})",
                                  Experiment::Inclusion);
  EXPECT_EQ(c.spec.n, 6);
  EXPECT_EQ(c.spec.ell, 2);
  EXPECT_EQ(c.spec.k, 2);
  EXPECT_EQ(c.spec.r, 4);
  EXPECT_EQ(c.spec.rank_inf(), 3);
  EXPECT_EQ(c.spec.noise, model::NoiseKind::Uniform);
  EXPECT_EQ(c.spec.seed, 5u);
  EXPECT_EQ(c.m_schedule, (std::vector<Index>{100, 1000}));
  EXPECT_EQ(c.replicates, 8);
  EXPECT_TRUE(c.auto_rank);
  EXPECT_EQ(c.out_prefix, "x");

  const auto d = config_from_json(R"({"n": 3, "k": 1, "r": 3, "sigma": 0, "m_schedule": [10], "rank_mode": 2})",
                                  Experiment::Misspecification);
  EXPECT_EQ(d.rank, Index{2});
  EXPECT_EQ(d.spec.coupling, model::ExactRowCoupling::Disjoint);
}

TEST(Config, ErrorsNameTheField) {
  const std::pair<const char*, const char*> cases[] = {
      {R"({"n": 3, "k": 0, "r": 3, "sigma": 0.1, "m_schedule": [10], "bogus": 1})", "bogus"},
      {R"({"n": 3, "k": 0, "r": 3, "m_schedule": [10], "sigma": "x"})", "sigma"},
      {R"({"n": 3, "k": 0, "r": 3, "sigma": 0.1, "m_schedule": [3]})", "m_schedule"},
      {R"({"n": 3, "k": 0, "r": 3, "sigma": 0.1, "m_schedule": [10], "noise": "cauchy"})", "noise"},
      {R"({"n": 3, "k": 0, "r": 3, "sigma": 0.1, "m_schedule": [10], "rank_mode": "maybe"})", "rank_mode"},
  };
  for (const auto& [text, field] : cases) {
    try {
      config_from_json(text, Experiment::Consistency);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidConfig) << e.what();
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  }
  EXPECT_THROW(config_from_json("{not json", Experiment::Consistency), Error);
  EXPECT_THROW(config_from_json(R"({"n": 3, "k": 3, "r": 3, "sigma": 0.1, "m_schedule": [10]})", Experiment::Consistency), Error);
}

TEST(Config, Slln) {
  const auto c = slln_config_from_json(R"({"alpha": "alternating", "m_schedule": [10, 100], "replicates": 4})");
  EXPECT_EQ(c.alpha, AlphaKind::Alternating);
  EXPECT_EQ(c.seeds, 4);
  EXPECT_DOUBLE_EQ(c.sigma, 1.0);
  EXPECT_THROW(slln_config_from_json(R"({"alpha": "two", "m_schedule": [10]})"), Error);
}
