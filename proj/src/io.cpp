#include "walklab/io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "walklab/errors.hpp"

namespace walklab {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                  nullptr))
    throw IoFailure("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) {
  return sha256_hex(read_text(path));
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoFailure("cannot open " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw IoFailure("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("cannot open " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::string Csv::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < header.size(); ++i)
    os << header[i] << (i + 1 == header.size() ? '\n' : ',');
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << row[i] << (i + 1 == row.size() ? '\n' : ',');
  }
  return os.str();
}

Csv parse_csv(const std::string& text) {
  Csv csv;
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw IoFailure("empty csv");
  std::istringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) csv.header.push_back(cell);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream rs(line);
    std::vector<double> row;
    while (std::getline(rs, cell, ',')) row.push_back(std::stod(cell));
    csv.rows.push_back(std::move(row));
  }
  return csv;
}

fs::path write_manifest(const fs::path& dir,
                        const std::vector<std::string>& files,
                        const std::string& meta_json) {
  json m;
  m["meta"] = meta_json.empty() ? json::object() : json::parse(meta_json);
  m["files"] = json::array();
  for (const auto& f : files) {
    json e;
    e["name"] = f;
    e["sha256"] = sha256_file(dir / f);
    m["files"].push_back(e);
  }
  const fs::path path = dir / "manifest.json";
  write_text_atomic(path, m.dump(2) + "\n");
  return path;
}

bool verify_manifest(const fs::path& manifest_path, std::string* failure) {
  json m;
  try {
    m = json::parse(read_text(manifest_path));
  } catch (const std::exception& e) {
    if (failure) *failure = e.what();
    return false;
  }
  const fs::path dir = manifest_path.parent_path();
  for (const auto& e : m.at("files")) {
    const std::string name = e.at("name").get<std::string>();
    try {
      if (sha256_file(dir / name) != e.at("sha256").get<std::string>()) {
        if (failure) *failure = "hash mismatch: " + name;
        return false;
      }
    } catch (const std::exception& err) {
      if (failure) *failure = err.what();
      return false;
    }
  }
  return true;
}

namespace {

std::string doubles_to_bytes(const std::vector<double>& v) {
  return std::string(reinterpret_cast<const char*>(v.data()),
                     v.size() * sizeof(double));
}

std::vector<double> bytes_to_doubles(const std::string& s) {
  std::vector<double> v(s.size() / sizeof(double));
  std::memcpy(v.data(), s.data(), v.size() * sizeof(double));
  return v;
}

}  // namespace

std::string kernel_cache_key(const IncrementFamily& f, std::size_t horizon,
                             std::int64_t start) {
  std::ostringstream os;
  os << "kernel|" << f.describe() << "|N=" << horizon << "|x=" << start;
  return sha256_hex(os.str());
}

void cache_store_kernel_row(const fs::path& dir, const std::string& key,
                            const std::vector<double>& row) {
  write_text_atomic(dir / (key + ".bin"), doubles_to_bytes(row));
}

bool cache_load_kernel_row(const fs::path& dir, const std::string& key,
                           std::vector<double>* row) {
  const fs::path p = dir / (key + ".bin");
  if (!fs::exists(p)) return false;
  *row = bytes_to_doubles(read_text(p));
  return true;
}

std::string renewal_cache_key(const IncrementFamily& f, RenewalKind kind,
                              const std::vector<double>& grid,
                              std::uint64_t seed) {
  std::ostringstream os;
  os << "renewal|" << f.describe() << "|kind=" << static_cast<int>(kind)
     << "|seed=" << seed << "|grid=";
  os.precision(17);
  for (double g : grid) os << g << ",";
  return sha256_hex(os.str());
}

void cache_store_renewal(const fs::path& dir, const std::string& key,
                         const RenewalTable& table) {
  json j;
  j["kind"] = static_cast<int>(table.kind);
  j["grid"] = table.grid;
  j["values"] = table.values;
  j["stderrs"] = table.stderrs;
  j["zeta"] = table.zeta;
  j["exact"] = table.exact;
  j["alpha_rho"] = table.alpha_rho;
  write_text_atomic(dir / (key + ".json"), j.dump());
}

bool cache_load_renewal(const fs::path& dir, const std::string& key,
                        RenewalTable* table) {
  const fs::path p = dir / (key + ".json");
  if (!fs::exists(p)) return false;
  json j = json::parse(read_text(p));
  table->kind = static_cast<RenewalKind>(j.at("kind").get<int>());
  table->grid = j.at("grid").get<std::vector<double>>();
  table->values = j.at("values").get<std::vector<double>>();
  table->stderrs = j.at("stderrs").get<std::vector<double>>();
  table->zeta = j.at("zeta").get<double>();
  table->exact = j.at("exact").get<bool>();
  table->alpha_rho = j.at("alpha_rho").get<double>();
  return true;
}

}  // namespace walklab
