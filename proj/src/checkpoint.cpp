#include "alpharnn/checkpoint.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace arnn {

namespace {

constexpr const char* kMagic = "alpharnn-checkpoint";
constexpr int kVersion = 1;

void write_block(std::ostream& os, const char* kind, std::string_view name, const Matrix& m) {
  os << kind << ' ' << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << m(i, j);
    }
    os << '\n';
  }
}

[[noreturn]] void fail(const std::string& what) { throw IoError("checkpoint: " + what); }

std::istringstream next_line(std::istream& is, const char* expecting) {
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) return std::istringstream(line);
  }
  fail(std::string("unexpected end of file, expecting ") + expecting);
}

Matrix read_values(std::istream& is, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
  if (rows < 0 || cols < 0) fail("negative shape for " + name);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    auto line = next_line(is, "matrix row");
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::string tok;
      if (!(line >> tok)) fail("short row in block " + name);
      try {
        std::size_t used = 0;
        m(i, j) = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        fail("bad number '" + tok + "' in block " + name);
      }
    }
  }
  return m;
}

}  // namespace

const std::string* Checkpoint::find_meta(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return &v;
  return nullptr;
}

const Matrix* Checkpoint::find_extra(const std::string& name) const {
  for (const auto& [k, v] : extras)
    if (k == name) return &v;
  return nullptr;
}

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt) {
  const CellParams& p = ckpt.params;
  validate(p);
  os << std::setprecision(17);
  os << kMagic << ' ' << kVersion << '\n';
  os << "architecture " << to_string(p.arch) << " d " << p.dims.input << " H " << p.dims.hidden
     << " n " << p.dims.output << " p " << p.dims.seq_len << '\n';
  os << "readout " << to_string(p.readout) << '\n';
  os << "activation " << to_string(p.activation) << '\n';
  for (const auto& [k, v] : ckpt.meta) os << "meta " << k << ' ' << v << '\n';
  for (Slot s : p.slots()) write_block(os, "param", slot_name(s), p[s]);
  for (const auto& [name, m] : ckpt.extras) write_block(os, "extra", name, m);
  os << "end\n";
}

Checkpoint read_checkpoint(std::istream& is) {
  Checkpoint ckpt;
  {
    auto line = next_line(is, "header");
    std::string magic;
    int version = 0;
    line >> magic >> version;
    if (magic != kMagic) fail("not a checkpoint file");
    if (version != kVersion) fail("unsupported version " + std::to_string(version));
  }
  std::string arch_tag;
  Dims dims;
  {
    auto line = next_line(is, "architecture line");
    std::string kw, kd, kh, kn, kp;
    if (!(line >> kw >> arch_tag >> kd >> dims.input >> kh >> dims.hidden >> kn >> dims.output >>
          kp >> dims.seq_len) ||
        kw != "architecture" || kd != "d" || kh != "H" || kn != "n" || kp != "p")
      fail("malformed architecture line");
  }
  Architecture arch;
  try {
    arch = parse_architecture(arch_tag);
    ckpt.params = zero_cell(arch, dims);
  } catch (const UsageError& e) {
    fail(e.what());
  }

  std::vector<bool> seen(kSlotCount, false);
  for (;;) {
    auto line = next_line(is, "block or 'end'");
    std::string kw;
    line >> kw;
    if (kw == "end") break;
    if (kw == "readout") {
      std::string v;
      line >> v;
      if (v == "smoothed") ckpt.params.readout = Readout::Smoothed;
      else if (v == "unsmoothed") ckpt.params.readout = Readout::Unsmoothed;
      else fail("unknown readout '" + v + "'");
    } else if (kw == "activation") {
      std::string v;
      line >> v;
      if (v == "tanh") ckpt.params.activation = Activation::Tanh;
      else if (v == "identity") ckpt.params.activation = Activation::Identity;
      else fail("unknown activation '" + v + "'");
    } else if (kw == "meta") {
      std::string k, v;
      line >> k;
      std::getline(line >> std::ws, v);
      ckpt.meta.emplace_back(k, v);
    } else if (kw == "param" || kw == "extra") {
      std::string name;
      Eigen::Index r = -1, c = -1;
      if (!(line >> name >> r >> c)) fail("malformed block header");
      Matrix m = read_values(is, r, c, name);
      if (kw == "extra") {
        ckpt.extras.emplace_back(name, std::move(m));
        continue;
      }
      Slot s;
      try {
        s = parse_slot(name);
      } catch (const UsageError& e) {
        fail(e.what());
      }
      auto [er, ec] = slot_shape(s, dims);
      if (r != er || c != ec) fail("parameter " + name + " has wrong shape");
      ckpt.params[s] = std::move(m);
      seen[static_cast<int>(s)] = true;
    } else {
      fail("unknown keyword '" + kw + "'");
    }
  }
  for (Slot s : slots_for(arch))
    if (!seen[static_cast<int>(s)]) fail("missing parameter " + std::string(slot_name(s)));
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_checkpoint(os, ckpt);
  if (!os) throw IoError("failed writing '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  return read_checkpoint(is);
}

}  // namespace arnn
