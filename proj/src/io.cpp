#include "llb/io.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace llb {

namespace {

void write_row(std::ostream& os, const FieldXd& f, Eigen::Index i) {
  os << f(i, 0) << ',' << f(i, 1) << ',' << f(i, 2) << '\n';
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec) {
  os << "step,time,l2,h1_semi,h2_semi,linf\n";
  os.precision(17);
  for (std::size_t n = 0; n < rec.reports.size(); ++n) {
    const auto& r = rec.reports[n];
    os << n << ',' << r.time << ',' << r.l2 << ',' << r.h1_semi << ','
       << r.h2_semi << ',' << r.linf << '\n';
  }
}

void write_snapshots_csv(std::ostream& os, const TrajectoryRecord& rec) {
  os << "step,node_index,ux,uy,uz\n";
  os.precision(17);
  for (std::size_t n = 0; n < rec.snapshots.size(); ++n) {
    const FieldXd& f = rec.snapshots[n];
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      os << rec.snapshot_steps[n] << ',' << i << ',';
      write_row(os, f, i);
    }
  }
}

void write_field_csv(std::ostream& os, const FieldXd& f) {
  os << "node_index,ux,uy,uz\n";
  os.precision(17);
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    os << i << ',';
    write_row(os, f, i);
  }
}

FieldXd read_field_csv(std::istream& is, const Grid& grid) {
  std::string line;
  if (!std::getline(is, line) || line != "node_index,ux,uy,uz") {
    throw std::invalid_argument("field csv: expected header node_index,ux,uy,uz");
  }
  FieldXd f = grid.zeros();
  std::vector<char> seen(grid.n_interior(), 0);
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    long idx = -1;
    double v[3];
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(row >> idx >> c1 >> v[0] >> c2 >> v[1] >> c3 >> v[2]) || c1 != ',' ||
        c2 != ',' || c3 != ',') {
      throw std::invalid_argument("field csv: malformed line " +
                                  std::to_string(lineno));
    }
    if (idx < 0 || idx >= grid.n_interior() || seen[idx]) {
      throw std::invalid_argument("field csv: bad or repeated node index on line " +
                                  std::to_string(lineno));
    }
    seen[idx] = 1;
    for (int j = 0; j < 3; ++j) f(idx, j) = v[j];
  }
  for (char s : seen) {
    if (!s) throw std::invalid_argument("field csv: missing nodes");
  }
  return f;
}

}  // namespace llb
