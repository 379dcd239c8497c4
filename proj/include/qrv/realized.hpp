#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qrv/data_ingest.hpp"
#include "qrv/timeutil.hpp"

namespace qrv::rm {

struct DailyMeasures {
    Date day = 0;
    double rv = 0.0;
    double medrv = 0.0;
    double rs_minus = 0.0;
    double rs_plus = 0.0;
    double medrq = 0.0;
    double z_jump = 0.0;
    bool jump_flag = false;
    double iv = 0.0;
    double jv = 0.0;
    int m = 0;  // intraday return count
};

struct MeasurePanel {
    std::vector<DailyMeasures> rows;                    // strictly increasing dates
    std::optional<std::vector<double>> implied_vol;     // aligned with rows when present

    std::size_t size() const { return rows.size(); }
    void attach_implied_vol(const std::vector<std::pair<Date, double>>& series);
};

double realized_variance(std::span<const double> returns);

// (rs_minus, rs_plus); zeros contribute to neither side
std::pair<double, double> realized_semivariances(std::span<const double> returns);

double med_rv(std::span<const double> returns);   // requires M >= 3
double med_rq(std::span<const double> returns);   // requires M >= 3

// Ratio-form jump statistic based on the RV/MedRV gap; one-sided, large
// values indicate jumps. theta is the asymptotic variance constant of the
// ratio (default 0.96 for the MedRV pair).
double jump_test_z(double rv, double medrv, double medrq, int m, double theta = 0.96);

struct Decomposition {
    double iv = 0.0;
    double jv = 0.0;
    bool jump_flag = false;
    bool clamped = false;  // medrv exceeded rv on a flagged day
};

// Shrinkage decomposition: on flagged days iv = medrv, jv = rv - medrv
// (clamped at zero); otherwise iv = rv, jv = 0. iv + jv == rv always.
Decomposition decompose_iv_jv(const DailyMeasures& m, double significance);

// Full per-day pipeline over intraday grids. Days with rv == 0 are excluded
// and reported (degenerate for MedRV-based testing).
MeasurePanel compute_panel(const std::vector<ingest::IntradayGrid>& grids, double significance,
                           std::vector<std::string>* warnings = nullptr);

void write_panel_csv(const std::string& path, const MeasurePanel& panel);
MeasurePanel read_panel_csv(const std::string& path);

}  // namespace qrv::rm
