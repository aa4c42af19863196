#include "entropal/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace entropal {

namespace {

// "%.*e" then strip the zero-padded exponent: 8.8e-07 -> 8.8e-7.
std::string sci(double x, int digits) {
  if (!std::isfinite(x)) return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*e", digits, x);
  std::string s(buf);
  auto epos = s.find('e');
  std::string mant = s.substr(0, epos);
  std::string expo = s.substr(epos + 1);
  char sign = expo[0];
  std::size_t i = 1;
  while (i + 1 < expo.size() && expo[i] == '0') ++i;
  return mant + "e" + sign + expo.substr(i);
}

}  // namespace

std::string format_sci(double x) { return sci(x, 1); }
std::string format_obj(double x) { return sci(x, 7); }

std::string format_hms(double ms) {
  long long total = static_cast<long long>(std::llround(ms / 1000.0));
  long long h = total / 3600, m = (total % 3600) / 60, s = total % 60;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld", h, m, s);
  return buf;
}

const char* const kTableHeader =
    "algorithm | pbname (n,m1) | mu | it/itsub/pcg | pobj | dobj | "
    "R_P/R_D/R_C/R_G | time";

namespace {

std::string row_cells(const ReportRow& r, std::vector<std::string>& out) {
  out.clear();
  out.push_back(r.algorithm);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s (%d,%d)", r.pbname.c_str(), r.n, r.m1);
  out.push_back(buf);
  std::snprintf(buf, sizeof(buf), "%g", r.mu);
  out.push_back(buf);
  if (r.algorithm == "PALM") {
    std::snprintf(buf, sizeof(buf), "%lld", r.it);
  } else {
    std::snprintf(buf, sizeof(buf), "%lld/%lld/%.1f", r.it, r.itsub, r.pcg_mean);
  }
  out.push_back(buf);
  out.push_back(format_obj(r.pobj));
  out.push_back(format_obj(r.dobj));
  out.push_back(format_sci(r.RP) + "/" + format_sci(r.RD) + "/" +
                format_sci(r.RC) + "/" + format_sci(r.RG));
  out.push_back(format_hms(r.wall_ms) + (r.converged ? "" : " (not converged)"));
  return {};
}

}  // namespace

std::string render_table(const std::vector<ReportRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header;
  {
    std::istringstream hs(kTableHeader);
    std::string tok;
    std::string cur;
    while (std::getline(hs, tok, '|')) {
      while (!tok.empty() && tok.front() == ' ') tok.erase(tok.begin());
      while (!tok.empty() && tok.back() == ' ') tok.pop_back();
      header.push_back(tok);
    }
  }
  cells.push_back(header);
  for (const auto& r : rows) {
    std::vector<std::string> c;
    row_cells(r, c);
    cells.push_back(c);
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells)
    for (std::size_t i = 0; i < row.size(); ++i)
      width[i] = std::max(width[i], row[i].size());
  std::ostringstream os;
  for (std::size_t ri = 0; ri < cells.size(); ++ri) {
    for (std::size_t i = 0; i < cells[ri].size(); ++i) {
      if (i) os << " | ";
      os << cells[ri][i];
      os << std::string(width[i] - cells[ri][i].size(), ' ');
    }
    os << "\n";
    if (ri == 0) {
      std::size_t total = 0;
      for (std::size_t i = 0; i < width.size(); ++i)
        total += width[i] + (i ? 3 : 0);
      os << std::string(total, '-') << "\n";
    }
  }
  return os.str();
}

namespace {

std::string g17(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

std::string render_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  os << "algorithm,pbname,n,m1,m2,mu,it,itsub,pcg_mean,pobj,dobj,RP,RD,RC,RG,"
        "time_ms,converged,status\n";
  for (const auto& r : rows) {
    os << r.algorithm << ',' << r.pbname << ',' << r.n << ',' << r.m1 << ','
       << r.m2 << ',' << g17(r.mu) << ',' << r.it << ',' << r.itsub << ','
       << g17(r.pcg_mean) << ',' << g17(r.pobj) << ',' << g17(r.dobj) << ','
       << g17(r.RP) << ',' << g17(r.RD) << ',' << g17(r.RC) << ',' << g17(r.RG)
       << ',' << g17(r.wall_ms) << ',' << (r.converged ? 1 : 0) << ','
       << r.status << "\n";
  }
  return os.str();
}

std::string render_history_csv(const std::vector<EntropyIterRow>& rows) {
  std::ostringstream os;
  os << "k,sigma,inner_iters,pcg_iters,gap,dual_step,a2,b2,pobj,dobj,RP,RD,RC,"
        "RG\n";
  for (const auto& r : rows) {
    os << r.k << ',' << g17(r.sigma) << ',' << r.inner_iters << ','
       << r.pcg_iters << ',' << g17(r.gap) << ',' << g17(r.dual_step) << ','
       << (r.a2 ? 1 : 0) << ',' << (r.b2 ? 1 : 0) << ',' << g17(r.pobj) << ','
       << g17(r.dobj) << ',' << g17(r.RP) << ',' << g17(r.RD) << ','
       << g17(r.RC) << ',' << g17(r.RG) << "\n";
  }
  return os.str();
}

ReportRow report_row_from_alm(const std::string& pbname,
                              const EntropyProblem& prob,
                              const EntropySolveResult& res, double wall_ms) {
  ReportRow row;
  row.algorithm = "ALM";
  row.pbname = pbname;
  row.n = prob.n();
  row.m1 = prob.m1();
  row.m2 = prob.m2();
  row.mu = prob.mu;
  row.it = res.outer;
  row.itsub = res.inner_total;
  row.pcg_mean = res.pcg_mean;
  row.pobj = res.point.res.pobj;
  row.dobj = res.point.res.dobj;
  row.RP = res.point.res.RP;
  row.RD = res.point.res.RD;
  row.RC = res.point.res.RC;
  row.RG = res.point.res.RG;
  row.wall_ms = wall_ms;
  row.converged = res.converged;
  row.status = res.status;
  return row;
}

ReportRow report_row_from_palm(const std::string& pbname,
                               const EntropyProblem& prob,
                               const PalmResult& res, double wall_ms) {
  ReportRow row;
  row.algorithm = "PALM";
  row.pbname = pbname;
  row.n = prob.n();
  row.m1 = prob.m1();
  row.m2 = prob.m2();
  row.mu = prob.mu;
  row.it = res.iterations;
  row.pobj = res.res.pobj;
  row.dobj = res.res.dobj;
  row.RP = res.res.RP;
  row.RD = res.res.RD;
  row.RC = res.res.RC;
  row.RG = res.res.RG;
  row.wall_ms = wall_ms;
  row.converged = res.converged;
  row.status = res.converged ? "converged" : "not converged";
  return row;
}

}  // namespace entropal
