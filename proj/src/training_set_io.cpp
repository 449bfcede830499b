#include "droc/training_set_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "droc/errors.hpp"

namespace droc {

namespace {

constexpr char kMagic[8] = {'D', 'R', 'O', 'C', 'T', 'S', '0', '1'};

void putU64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
  out.write(bytes, 8);
}

std::uint64_t getU64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw InvalidArgument("training set: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

void putDouble(std::ostream& out, double d) { putU64(out, std::bit_cast<std::uint64_t>(d)); }
double getDouble(std::istream& in) { return std::bit_cast<double>(getU64(in)); }

}  // namespace

nlohmann::json gridToJson(const GridSpec& grid) {
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& a : grid.axes) {
    axes.push_back({{"min", a.min}, {"max", a.max}, {"count", a.count}});
  }
  return axes;
}

GridSpec gridFromJson(const nlohmann::json& j) {
  GridSpec grid;
  for (const auto& a : j) {
    GridAxis axis{a.at("min").get<double>(), a.at("max").get<double>(), a.at("count").get<int>()};
    if (axis.count < 1) throw InvalidArgument("grid axis count must be positive");
    grid.axes.push_back(axis);
  }
  return grid;
}

void writeTrainingSet(const TrainingSet& ts, const std::filesystem::path& path) {
  ts.validate();
  const int r = ts.stateDim();
  const int m = ts.numStates();
  const int N = ts.numRealizations();
  const nlohmann::json header = {
      {"format", "droc-training-set"},
      {"version", 1},
      {"state_dim", r},
      {"m", m},
      {"N", N},
      {"grid", gridToJson(ts.grid)},
      {"seed", ts.seed},
      {"dtype", "float64-le"},
      {"columns", {{{"name", "states"}, {"shape", {r, m}}},
                   {{"name", "samples"}, {"shape", {r, m, N}}}}}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  out.write(kMagic, sizeof(kMagic));
  putU64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < m; ++j) putDouble(out, ts.states(i, j));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < m; ++j)
      for (int l = 0; l < N; ++l) putDouble(out, ts.samples[static_cast<std::size_t>(j)](i, l));
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

TrainingSet readTrainingSet(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw InvalidArgument(path.string() + " is not a training-set file");
  }
  const std::uint64_t len = getU64(in);
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw InvalidArgument("training set: truncated header");
  const auto header = nlohmann::json::parse(text);

  TrainingSet ts;
  const int r = header.at("state_dim").get<int>();
  const int m = header.at("m").get<int>();
  const int N = header.at("N").get<int>();
  ts.grid = gridFromJson(header.at("grid"));
  ts.seed = header.at("seed").get<std::uint64_t>();
  ts.states.resize(r, m);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < m; ++j) ts.states(i, j) = getDouble(in);
  ts.samples.assign(static_cast<std::size_t>(m), Eigen::MatrixXd(r, N));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < m; ++j)
      for (int l = 0; l < N; ++l) ts.samples[static_cast<std::size_t>(j)](i, l) = getDouble(in);
  ts.validate();
  return ts;
}

}  // namespace droc
