#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "alpharnn/cells.hpp"

namespace arnn {

/// Parameter checkpoint: the cell plus named auxiliary matrices (e.g.
/// normalisation moments) and string metadata.
///
/// Text layout, version 1:
///
///     alpharnn-checkpoint 1
///     architecture alpha_rnn d 1 H 5 n 1 p 10
///     readout smoothed
///     activation tanh
///     meta <key> <value>            (zero or more)
///     param <name> <rows> <cols>    followed by one line per row
///     extra <name> <rows> <cols>    followed by one line per row
///     end
///
/// Values are written with 17 significant digits so a write/read cycle is
/// bit-exact.
struct Checkpoint {
  CellParams params;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::pair<std::string, Matrix>> extras;

  const std::string* find_meta(const std::string& key) const;
  const Matrix* find_extra(const std::string& name) const;
};

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& is);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace arnn
