#ifndef ENTROPAL_REPORT_HPP
#define ENTROPAL_REPORT_HPP

#include <string>
#include <vector>

#include "entropal/entropy_alm.hpp"

namespace entropal {

// One benchmark table row; PALM and ALM runs of the same instance are
// reported as consecutive rows.
struct ReportRow {
  std::string algorithm;
  std::string pbname;
  int n = 0, m1 = 0, m2 = 0;
  double mu = 0.0;
  long long it = 0;       // outer iterations (PALM: total iterations)
  long long itsub = 0;    // total inner SSN iterations (ALM only)
  double pcg_mean = 0.0;  // mean PCG steps per linear system (ALM only)
  double pobj = 0.0, dobj = 0.0;
  double RP = 0.0, RD = 0.0, RC = 0.0, RG = 0.0;
  double wall_ms = 0.0;
  bool converged = false;
  std::string status;
};

// Locale-independent scientific shorthand, e.g. 8.8e-7 / -5.3e+0.
std::string format_sci(double x);
// Objective values with 8 significant digits, e.g. -5.2628536e+0.
std::string format_obj(double x);
// Wall time as hh:mm:ss (rounded to whole seconds).
std::string format_hms(double ms);

// Header of the human-readable benchmark table.
extern const char* const kTableHeader;

std::string render_table(const std::vector<ReportRow>& rows);
std::string render_csv(const std::vector<ReportRow>& rows);
std::string render_history_csv(const std::vector<EntropyIterRow>& rows);

ReportRow report_row_from_alm(const std::string& pbname,
                              const EntropyProblem& prob,
                              const EntropySolveResult& res, double wall_ms);
ReportRow report_row_from_palm(const std::string& pbname,
                               const EntropyProblem& prob,
                               const PalmResult& res, double wall_ms);

}  // namespace entropal

#endif
