#include "ictus/param_file.hpp"

#include "binio.hpp"
#include "ictus/error.hpp"

namespace ictus {

namespace {

constexpr char kMagic[4] = {'I', 'C', 'T', 'P'};

}  // namespace

void write_params(const ParamFile& file, const std::filesystem::path& path) {
  detail::Writer w;
  w.put_bytes(std::string_view(kMagic, 4));
  w.put<std::uint32_t>(kParamFormatVersion);
  w.put_string(file.kind);
  w.put_string(file.meta.dump());
  w.put<std::uint64_t>(file.values.size());
  w.put_doubles(file.values.data(), file.values.size());
  detail::write_file(path.string(), w.bytes());
}

ParamFile read_params(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file(path.string());
  detail::Reader r(bytes);
  if (r.remaining() < 4 || r.get_bytes(4) != std::string_view(kMagic, 4)) {
    throw Error(Errc::format, path.string() + " is not a parameter file");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kParamFormatVersion) {
    throw Error(Errc::version_mismatch, "parameter format version " + std::to_string(version) + " is not supported");
  }
  ParamFile out;
  out.kind = r.get_string();
  try {
    out.meta = nlohmann::json::parse(r.get_string());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::format, std::string("bad parameter metadata: ") + e.what());
  }
  const auto count = r.get<std::uint64_t>();
  if (count > r.remaining() / sizeof(double)) throw Error(Errc::truncated, "parameter file is truncated");
  out.values.resize(static_cast<std::size_t>(count));
  r.get_doubles(out.values.data(), out.values.size());
  if (r.remaining() != 0) throw Error(Errc::format, "trailing bytes after parameters");
  return out;
}

std::string param_kind(const std::filesystem::path& path) { return read_params(path).kind; }

}  // namespace ictus
