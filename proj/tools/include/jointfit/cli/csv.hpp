#pragma once

#include "jointfit/dynamics.hpp"
#include "jointfit/kinematics.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace jointfit::cli {

/// Shortest round-trip decimal representation of a double (bit-stable files).
std::string format_double(double v);

/// Strict double parser; throws std::invalid_argument on trailing garbage.
double parse_double(const std::string& s);

/// Write a file atomically (temp file + rename).
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

/// FNV-1a 64-bit content hash, hex-encoded; provenance for reports.
std::string fnv1a_hex(const std::string& bytes);

// Fixed CSV schemas. Headers are exact; numbers are shortest round-trip.
// pose:       t,px,py,pz,qw,qx,qy,qz
// jointstate: t,dx,dy,dz,vx,vy,vz,thx,thy,thz,wx,wy,wz,valid
// linkmotion: t,qw,qx,qy,qz,wx,wy,wz,alx,aly,alz,valid
// wrench:     t,fx,fy,fz,tx,ty,tz
// markers:    t,<id>_x,<id>_y,<id>_z,...

std::string pose_csv(const kin::BodyTrajectory& traj);
kin::BodyTrajectory read_pose_csv(const std::filesystem::path& path, const std::string& body_id);

std::string joint_state_csv(const kin::JointStateSeries& series);
kin::JointStateSeries read_joint_state_csv(const std::filesystem::path& path,
                                           const std::string& joint_id);

std::string link_motion_csv(const kin::LinkMotionSeries& series);
kin::LinkMotionSeries read_link_motion_csv(const std::filesystem::path& path,
                                           const std::string& body_id);

std::string wrench_csv(const sim::WrenchSeries& series);
sim::WrenchSeries read_wrench_csv(const std::filesystem::path& path, const std::string& joint_id);

struct MarkerTable {
    std::vector<std::string> ids;          // column order
    std::vector<double> t;                 // per row
    std::vector<std::vector<Vec3>> rows;   // rows[i][k] = position of ids[k] at t[i]
};

std::string marker_csv(const MarkerTable& table);
MarkerTable read_marker_csv(const std::filesystem::path& path);

}  // namespace jointfit::cli
