#include "uiodrem/numerics/trajectory.hpp"

#include <algorithm>
#include <cstring>

namespace uiodrem {

Trajectory::Trajectory(double t0, double dt) : t0_(t0), dt_(dt) {
  if (!(dt > 0.0)) throw ConfigError("Trajectory: dt must be positive");
}

std::size_t Trajectory::add_channel(const std::string& name, std::size_t width) {
  if (!data_.empty()) throw ConfigError("Trajectory: cannot add channel '" + name + "' after samples");
  if (width == 0) throw ConfigError("Trajectory: channel '" + name + "' has zero width");
  if (has_channel(name)) throw ConfigError("Trajectory: duplicate channel '" + name + "'");
  channels_.push_back({name, width, width_});
  width_ += width;
  return channels_.size() - 1;
}

const Trajectory::Channel& Trajectory::channel(const std::string& name) const {
  auto it = std::find_if(channels_.begin(), channels_.end(), [&](const Channel& c) { return c.name == name; });
  if (it == channels_.end()) throw ConfigError("Trajectory: unknown channel '" + name + "'");
  return *it;
}

bool Trajectory::has_channel(const std::string& name) const {
  return std::any_of(channels_.begin(), channels_.end(), [&](const Channel& c) { return c.name == name; });
}

std::vector<std::string> Trajectory::column_names() const {
  std::vector<std::string> names;
  names.reserve(width_);
  for (const auto& ch : channels_) {
    if (ch.width == 1) {
      names.push_back(ch.name);
    } else {
      for (std::size_t i = 0; i < ch.width; ++i) names.push_back(ch.name + "[" + std::to_string(i) + "]");
    }
  }
  return names;
}

void Trajectory::append_row(std::span<const double> row) {
  if (row.size() != width_) throw ShapeError("Trajectory: row width mismatch");
  data_.insert(data_.end(), row.begin(), row.end());
}

std::span<const double> Trajectory::row(std::size_t sample) const {
  if (sample >= samples()) throw ShapeError("Trajectory: sample index out of range");
  return {data_.data() + sample * width_, width_};
}

double Trajectory::at(std::size_t sample, const std::string& name, std::size_t component) const {
  const auto& ch = channel(name);
  if (component >= ch.width) throw ShapeError("Trajectory: component out of range on " + name);
  return row(sample)[ch.offset + component];
}

Vector Trajectory::vector_at(std::size_t sample, const std::string& name) const {
  const auto& ch = channel(name);
  const auto r = row(sample);
  Vector v(static_cast<Eigen::Index>(ch.width));
  for (std::size_t i = 0; i < ch.width; ++i) v(static_cast<Eigen::Index>(i)) = r[ch.offset + i];
  return v;
}

std::vector<double> Trajectory::column(const std::string& name, std::size_t component) const {
  const auto& ch = channel(name);
  if (component >= ch.width) throw ShapeError("Trajectory: component out of range on " + name);
  std::vector<double> out(samples());
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = data_[s * width_ + ch.offset + component];
  return out;
}

bool operator==(const Trajectory& a, const Trajectory& b) {
  if (std::memcmp(&a.t0_, &b.t0_, sizeof(double)) != 0 || std::memcmp(&a.dt_, &b.dt_, sizeof(double)) != 0) return false;
  if (a.column_names() != b.column_names()) return false;
  if (a.data_.size() != b.data_.size()) return false;
  return a.data_.empty() || std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(double)) == 0;
}

RowWriter& RowWriter::set(const std::string& name, double value) {
  const auto& ch = traj_->channel(name);
  if (ch.width != 1) throw ShapeError("RowWriter: channel " + name + " is not scalar");
  row_[ch.offset] = value;
  return *this;
}

}  // namespace uiodrem
