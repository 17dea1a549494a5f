#include "semflow/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "semflow/error.hpp"

namespace semflow {

namespace fs = std::filesystem;

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::optional<std::string> read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return buf.str();
}

}  // namespace

std::optional<std::string> SidecarTextExtractor::extract(const fs::path& pdf) const {
  fs::path sidecar = pdf;
  sidecar += ".txt";
  std::error_code ec;
  if (!fs::is_regular_file(sidecar, ec)) return std::nullopt;
  return read_file(sidecar);
}

std::vector<fs::path> data_files(const fs::path& dir) {
  std::vector<fs::path> candidates;
  std::set<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::error_code ec;
    if (!entry.is_regular_file(ec)) continue;
    std::string name = entry.path().filename().string();
    if (name.empty() || name.front() == '.') continue;
    names.insert(name);
    candidates.push_back(entry.path());
  }
  std::vector<fs::path> out;
  for (auto& p : candidates) {
    std::string name = p.filename().string();
    if (ends_with(name, ".pdf.txt") && names.count(name.substr(0, name.size() - 4)) > 0) continue;
    out.push_back(std::move(p));
  }
  // Byte order on the base name.
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return out;
}

SchemaPtr detect_schema(const DataSource& source) {
  if (source.kind == SourceKind::Memory) return text_file_schema();
  auto files = data_files(source.root);
  if (files.empty()) {
    throw Error(ErrorCode::EmptyDirectory, source.root.string() + " contains no regular files");
  }
  auto pdfs = std::count_if(files.begin(), files.end(),
                            [](const fs::path& p) { return ends_with(p.filename().string(), ".pdf"); });
  return 2 * static_cast<std::size_t>(pdfs) > files.size() ? pdf_file_schema() : text_file_schema();
}

std::vector<Record> scan(const DataSource& source, const TextExtractor& extractor) {
  std::vector<Record> out;
  const SchemaPtr& schema = source.detected_schema ? source.detected_schema : text_file_schema();
  if (source.kind == SourceKind::Memory) {
    out.reserve(source.items.size());
    for (std::size_t i = 0; i < source.items.size(); ++i) {
      std::string name = "mem-" + std::to_string(i);
      Record rec = conform_record({{"filename", name}, {"contents", source.items[i]}}, schema, {},
                                  source.id + "/" + name);
      rec.source = std::to_string(i);
      out.push_back(std::move(rec));
    }
    return out;
  }

  for (const auto& file : data_files(source.root)) {
    std::string name = file.filename().string();
    std::optional<std::string> contents;
    std::optional<std::string> failure;
    if (ends_with(name, ".pdf")) {
      try {
        contents = extractor.extract(file);
      } catch (const std::exception& e) {
        failure = std::string("text extraction failed: ") + e.what();
      }
    } else {
      contents = read_file(file);
      if (!contents) failure = "could not read " + file.string();
    }
    json raw = {{"filename", name}, {"contents", contents ? json(*contents) : json(nullptr)}};
    Record rec = conform_record(raw, schema, {}, source.id + "/" + name);
    rec.source = file.string();
    rec.error = std::move(failure);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<Record> scan(const DataSource& source) {
  return scan(source, SidecarTextExtractor{});
}

// ---------------------------------------------------------------------------

DatasetRegistry::DatasetRegistry() : extractor_(std::make_shared<SidecarTextExtractor>()) {}

DataSource DatasetRegistry::register_dataset(const std::string& id, const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) throw Error(ErrorCode::PathNotFound, path.string() + " does not exist");
  if (!fs::is_directory(path, ec)) {
    throw Error(ErrorCode::NotADirectory, path.string() + " is not a directory");
  }
  DataSource src;
  src.id = id;
  src.kind = SourceKind::Directory;
  src.root = fs::absolute(path).lexically_normal();
  src.detected_schema = detect_schema(src);
  std::lock_guard lock(mutex_);
  sources_[id] = src;
  return src;
}

DataSource DatasetRegistry::register_memory(const std::string& id, std::vector<std::string> items) {
  DataSource src;
  src.id = id;
  src.kind = SourceKind::Memory;
  src.items = std::move(items);
  src.detected_schema = text_file_schema();
  std::lock_guard lock(mutex_);
  sources_[id] = src;
  return src;
}

std::optional<DataSource> DatasetRegistry::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sources_.find(id);
  if (it == sources_.end()) return std::nullopt;
  return it->second;
}

DataSource DatasetRegistry::get(const std::string& id) const {
  auto src = find(id);
  if (!src) throw Error(ErrorCode::UnknownSource, "no dataset registered as '" + id + "'");
  return *src;
}

std::vector<DataSource> DatasetRegistry::list() const {
  std::lock_guard lock(mutex_);
  std::vector<DataSource> out;
  for (const auto& [_, src] : sources_) out.push_back(src);
  return out;
}

void DatasetRegistry::set_extractor(std::shared_ptr<const TextExtractor> extractor) {
  std::lock_guard lock(mutex_);
  extractor_ = std::move(extractor);
}

std::shared_ptr<const TextExtractor> DatasetRegistry::extractor() const {
  std::lock_guard lock(mutex_);
  return extractor_;
}

json DatasetRegistry::to_json() const {
  std::lock_guard lock(mutex_);
  json out = json::array();
  for (const auto& [id, src] : sources_) {
    json entry = {{"id", id}, {"schema_name", src.detected_schema->name()}};
    if (src.kind == SourceKind::Directory) {
      entry["kind"] = "directory";
      entry["root"] = src.root.string();
    } else {
      entry["kind"] = "memory";
      entry["root"] = src.items;
    }
    out.push_back(std::move(entry));
  }
  return out;
}

void DatasetRegistry::load_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "dataset registry must be a JSON array");
  std::map<std::string, DataSource> loaded;
  try {
    for (const auto& entry : j) {
      DataSource src;
      src.id = entry.at("id").get<std::string>();
      std::string kind = entry.at("kind").get<std::string>();
      if (kind == "directory") {
        src.kind = SourceKind::Directory;
        src.root = entry.at("root").get<std::string>();
      } else if (kind == "memory") {
        src.kind = SourceKind::Memory;
        src.items = entry.at("root").get<std::vector<std::string>>();
      } else {
        throw Error(ErrorCode::ParseError, "unknown dataset kind '" + kind + "'");
      }
      auto schema = builtin_schema(entry.at("schema_name").get<std::string>());
      if (!schema) throw Error(ErrorCode::ParseError, "dataset schema must be a built-in schema");
      src.detected_schema = *schema;
      loaded[src.id] = std::move(src);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed dataset registry: ") + e.what());
  }
  std::lock_guard lock(mutex_);
  for (auto& [id, src] : loaded) sources_[id] = std::move(src);
}

void DatasetRegistry::save(const fs::path& file) const {
  std::ofstream out(file);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + file.string());
  out << to_json().dump(2) << '\n';
}

void DatasetRegistry::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, file.string() + ": " + e.what());
  }
  load_json(j);
}

}  // namespace semflow
