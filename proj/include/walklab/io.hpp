#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "walklab/kernel.hpp"
#include "walklab/renewal.hpp"

namespace walklab {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// Write via a temp file + rename so partial writes never surface.
void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content);
std::string read_text(const std::filesystem::path& path);

// Minimal CSV assembly; headers are mandatory in every emitted table.
struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::string to_string() const;
};

Csv parse_csv(const std::string& text);

struct ManifestEntry {
  std::string name;
  std::string sha256;
};

// Writes `files` (already present in `dir`), then the manifest last.
std::filesystem::path write_manifest(const std::filesystem::path& dir,
                                     const std::vector<std::string>& files,
                                     const std::string& meta_json);
bool verify_manifest(const std::filesystem::path& manifest_path,
                     std::string* failure = nullptr);

// Binary cache for kernel rows and renewal tables, keyed by a content hash
// of (family, horizon, start) so stale entries can never be confused.
std::string kernel_cache_key(const IncrementFamily& f, std::size_t horizon,
                             std::int64_t start);
void cache_store_kernel_row(const std::filesystem::path& dir,
                            const std::string& key,
                            const std::vector<double>& row);
bool cache_load_kernel_row(const std::filesystem::path& dir,
                           const std::string& key, std::vector<double>* row);

std::string renewal_cache_key(const IncrementFamily& f, RenewalKind kind,
                              const std::vector<double>& grid,
                              std::uint64_t seed);
void cache_store_renewal(const std::filesystem::path& dir,
                         const std::string& key, const RenewalTable& table);
bool cache_load_renewal(const std::filesystem::path& dir,
                        const std::string& key, RenewalTable* table);

}  // namespace walklab
