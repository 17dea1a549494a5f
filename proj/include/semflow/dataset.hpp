#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "semflow/schema.hpp"

namespace semflow {

enum class SourceKind { Directory, Memory };

struct DataSource {
  std::string id;
  SourceKind kind = SourceKind::Directory;
  std::filesystem::path root;      // Directory
  std::vector<std::string> items;  // Memory
  SchemaPtr detected_schema;
};

/// Pluggable PDF-to-text step. Returning nullopt marks the contents as null.
class TextExtractor {
 public:
  virtual ~TextExtractor() = default;
  virtual std::optional<std::string> extract(const std::filesystem::path& pdf) const = 0;
};

/// Reads `<name>.pdf.txt` next to `<name>.pdf` if it exists.
class SidecarTextExtractor final : public TextExtractor {
 public:
  std::optional<std::string> extract(const std::filesystem::path& pdf) const override;
};

/// Files of a directory source that become records: regular, non-hidden, and
/// not a text sidecar of a PDF in the same directory. Sorted by name.
std::vector<std::filesystem::path> data_files(const std::filesystem::path& dir);

/// PDFFile when a strict majority of data files end in `.pdf`, TextFile
/// otherwise. Memory sources are always TextFile.
SchemaPtr detect_schema(const DataSource& source);

/// One record per data file (or memory item), ordered by file name. A file
/// that cannot be read yields a record with null contents and `error` set.
std::vector<Record> scan(const DataSource& source, const TextExtractor& extractor);
std::vector<Record> scan(const DataSource& source);

class DatasetRegistry {
 public:
  DatasetRegistry();

  /// Re-registering an id replaces the previous source.
  DataSource register_dataset(const std::string& id, const std::filesystem::path& path);
  DataSource register_memory(const std::string& id, std::vector<std::string> items);

  [[nodiscard]] std::optional<DataSource> find(const std::string& id) const;
  [[nodiscard]] DataSource get(const std::string& id) const;
  [[nodiscard]] std::vector<DataSource> list() const;

  void set_extractor(std::shared_ptr<const TextExtractor> extractor);
  [[nodiscard]] std::shared_ptr<const TextExtractor> extractor() const;

  /// [{id, kind, root, schema_name}]; memory sources store their items as root.
  [[nodiscard]] json to_json() const;
  void load_json(const json& j);
  void save(const std::filesystem::path& file) const;
  void load(const std::filesystem::path& file);

 private:
  mutable std::mutex mutex_;
  std::map<std::string, DataSource> sources_;
  std::shared_ptr<const TextExtractor> extractor_;
};

}  // namespace semflow
