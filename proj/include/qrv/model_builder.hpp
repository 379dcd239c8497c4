#pragma once

#include <string>
#include <vector>

#include "qrv/qr.hpp"
#include "qrv/realized.hpp"
#include "qrv/timeutil.hpp"

namespace qrv::models {

enum class Target { Return, RvSqrt };

enum class Field {
    Intercept,
    RvSqrt,
    IvSqrt,
    JvSqrt,
    RsMinusSqrt,
    RsPlusSqrt,
    ImpliedVol,
    WednesdayDummy,
};

// One regressor: a field, an extra lag (0 = contemporaneous info date), and
// a rolling-mean window (1 = no averaging). Volatility fields enter in
// square-root (percent volatility) units.
struct Term {
    Field field = Field::Intercept;
    int lag = 0;
    int rolling = 1;

    std::string label() const;
    int lookback() const { return lag + rolling - 1; }
};

struct ModelSpec {
    std::string name;
    Target target = Target::Return;
    int horizon = 1;
    std::vector<Term> regressors;  // intercept first

    void validate() const;
};

// Named reference specifications. Return models: LQR1, LQR2, LQR3.
// Realized-volatility models: HARQ1, HARQ2, HARQ3; a trailing "W" adds the
// Wednesday dummy (e.g. HARQ1W). Throws ConfigError for unknown names.
ModelSpec reference_spec(const std::string& name, int horizon = 1);

// term := field | lagN(term) | meanN(term); fields: intercept, rv, iv, jv,
// rs_minus, rs_plus, impvol, wednesday
Term parse_term(const std::string& text);
ModelSpec parse_model_spec_file(const std::string& path);

struct AlignmentReport {
    std::size_t rows_total = 0;      // candidate rows before warm-up trimming
    std::size_t rows_used = 0;
    std::size_t warmup_dropped = 0;
    std::size_t degenerate_dropped = 0;
    Date first_date = 0;
    Date last_date = 0;
    std::vector<std::string> warnings;  // e.g. an all-zero regressor column
};

struct BuiltDataset {
    qr::Dataset data;
    ModelSpec spec;
    AlignmentReport report;
    std::vector<Date> target_dates;  // first target day per row (t+1)
};

// value at t = mean of series[t-k+1..t]; entries before index k-1 are
// unavailable and must not be read (returned vector marks them NaN).
std::vector<double> rolling_mean(const std::vector<double>& series, int k);

// Cumulative h-period return, or sqrt of the h-day RV aggregate.
double direct_target(const std::vector<double>& series, std::size_t t, int h, Target kind);

BuiltDataset build_return_dataset(const rm::MeasurePanel& panel,
                                  const std::vector<std::pair<Date, double>>& returns,
                                  const ModelSpec& spec);

BuiltDataset build_rv_dataset(const rm::MeasurePanel& panel, const ModelSpec& spec);

// Term values on the panel's day axis (NaN during the lag/rolling warm-up).
// Used to assemble exogenous regressors for the recursive models. Panel rows
// with rv == 0 must already be filtered out.
std::vector<double> term_series(const rm::MeasurePanel& panel, const Term& term);

void write_dataset_csv(const std::string& path, const BuiltDataset& built);

}  // namespace qrv::models
