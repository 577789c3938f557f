#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "uiodrem/numerics/types.hpp"

namespace uiodrem {

/// Uniformly sampled multi-channel record. Each channel has a name and a
/// width; a row holds one sample of every channel, laid out in channel
/// order. Column names are the channel name for width 1, name[i] otherwise.
class Trajectory {
 public:
  struct Channel {
    std::string name;
    std::size_t width;
    std::size_t offset;
  };

  Trajectory() = default;
  Trajectory(double t0, double dt);

  double t0() const noexcept { return t0_; }
  double dt() const noexcept { return dt_; }
  std::size_t samples() const noexcept { return width_ == 0 ? 0 : data_.size() / width_; }
  std::size_t row_width() const noexcept { return width_; }
  const std::vector<Channel>& channels() const noexcept { return channels_; }

  /// Channels can only be added while the record is empty.
  std::size_t add_channel(const std::string& name, std::size_t width = 1);
  const Channel& channel(const std::string& name) const;
  bool has_channel(const std::string& name) const;

  std::vector<std::string> column_names() const;

  void reserve(std::size_t rows) { data_.reserve(rows * width_); }
  void append_row(std::span<const double> row);

  double time(std::size_t sample) const { return t0_ + static_cast<double>(sample) * dt_; }
  std::span<const double> row(std::size_t sample) const;
  double at(std::size_t sample, const std::string& name, std::size_t component = 0) const;
  Vector vector_at(std::size_t sample, const std::string& name) const;
  /// All samples of one scalar column.
  std::vector<double> column(const std::string& name, std::size_t component = 0) const;

  const std::vector<double>& data() const noexcept { return data_; }

  /// Bitwise equality of grid, layout and data.
  friend bool operator==(const Trajectory& a, const Trajectory& b);

 private:
  double t0_ = 0.0;
  double dt_ = 1.0;
  std::vector<Channel> channels_;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// Helper to fill a row channel by channel.
class RowWriter {
 public:
  explicit RowWriter(const Trajectory& trajectory) : row_(trajectory.row_width(), 0.0), traj_(&trajectory) {}
  RowWriter& set(const std::string& name, double value);
  template <typename Derived>
  RowWriter& set(const std::string& name, const Eigen::MatrixBase<Derived>& value) {
    const auto& ch = traj_->channel(name);
    if (static_cast<std::size_t>(value.size()) != ch.width) throw ShapeError("RowWriter: width mismatch on " + name);
    for (std::size_t i = 0; i < ch.width; ++i) row_[ch.offset + i] = value(static_cast<Eigen::Index>(i));
    return *this;
  }
  std::span<const double> row() const noexcept { return row_; }

 private:
  std::vector<double> row_;
  const Trajectory* traj_;
};

}  // namespace uiodrem
