// Plain-text persistence of trajectories and fields. Every writer prints
// doubles with 17 significant digits so equal values give equal bytes.

#ifndef LLB_IO_HPP
#define LLB_IO_HPP

#include <iosfwd>

#include "llb/dynamics.hpp"

namespace llb {

/// Columns: step, time, l2, h1_semi, h2_semi, linf (one row per time step).
void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec);

/// Columns: step, node_index, ux, uy, uz (stored snapshots only).
void write_snapshots_csv(std::ostream& os, const TrajectoryRecord& rec);

/// Columns: node_index, ux, uy, uz.
void write_field_csv(std::ostream& os, const FieldXd& f);

/// Inverse of write_field_csv; every interior node must appear exactly once.
FieldXd read_field_csv(std::istream& is, const Grid& grid);

}  // namespace llb

#endif  // LLB_IO_HPP
