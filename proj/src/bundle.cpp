#include <fstream>
#include <sstream>
#include <unistd.h>

#include "enose/error.hpp"
#include "enose/hierarchy.hpp"

namespace enose {
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error("cannot write " + path.string());
}

std::string read_bundle_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptModel("bundle is missing " + path.filename().string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TrainedClassifier load_member(const fs::path& dir, const std::string& rel) {
  if (rel.empty() || rel.find("..") != std::string::npos || fs::path(rel).is_absolute()) {
    throw CorruptModel("bundle manifest has an invalid path '" + rel + "'");
  }
  try {
    return load_model(read_bundle_file(dir / rel));
  } catch (const CorruptModel& e) {
    throw CorruptModel(rel + ": " + e.what());
  }
}

}  // namespace

void save_bundle(const HierarchicalModel& model, const fs::path& dir) {
  nlohmann::json manifest;
  manifest["format_version"] = kModelFormatVersion;
  manifest["seed"] = model.seed;
  manifest["stage1"] = {{"file", "stage1.json"}, {"algorithm", model.stage1.algorithm_name()},
                        {"classes", model.stage1.classes()}};
  nlohmann::json s2 = nlohmann::json::object();
  for (const auto& [c, clf] : model.stage2) {
    s2[std::string(name(c))] = {{"file", "stage2/" + std::string(name(c)) + ".json"},
                                {"algorithm", clf.algorithm_name()},
                                {"classes", clf.classes()},
                                {"seed", clf.seed()}};
  }
  nlohmann::json s3 = nlohmann::json::object();
  for (const auto& [l, clf] : model.stage3) {
    s3[std::string(name(l))] = {{"file", "stage3/" + std::string(name(l)) + ".json"},
                                {"algorithm", clf.algorithm_name()},
                                {"classes", clf.classes()},
                                {"seed", clf.seed()}};
  }
  manifest["stage2"] = std::move(s2);
  manifest["stage3"] = std::move(s3);

  const fs::path target = fs::absolute(dir).lexically_normal();
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  fs::create_directories(tmp / "stage2");
  fs::create_directories(tmp / "stage3");
  try {
    write_file(tmp / "manifest.json", manifest.dump(2) + "\n");
    write_file(tmp / "stage1.json", save_model(model.stage1));
    for (const auto& [c, clf] : model.stage2) {
      write_file(tmp / "stage2" / (std::string(name(c)) + ".json"), save_model(clf));
    }
    for (const auto& [l, clf] : model.stage3) {
      write_file(tmp / "stage3" / (std::string(name(l)) + ".json"), save_model(clf));
    }
  } catch (...) {
    fs::remove_all(tmp);
    throw;
  }
  // A directory cannot be renamed over a non-empty one, so the old bundle
  // goes first; the new one only appears once it is complete.
  if (fs::exists(target)) fs::remove_all(target);
  fs::rename(tmp, target);
}

HierarchicalModel load_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ModelError(dir.string() + ": model bundle not found");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_bundle_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptModel(std::string("manifest.json: ") + e.what());
  }
  try {
    if (!manifest.contains("format_version")) throw CorruptModel("manifest.json has no format_version");
    const int version = manifest.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw VersionMismatch("bundle format version " + std::to_string(version) + " is not supported");
    }
    HierarchicalModel m{load_member(dir, manifest.at("stage1").at("file").get<std::string>()),
                        {}, {}, manifest.at("seed").get<std::uint64_t>(), {}};
    for (const auto& [key, entry] : manifest.at("stage2").items()) {
      auto c = parse_general_class(key);
      if (!c) throw CorruptModel("manifest names unknown class '" + key + "'");
      m.stage2.emplace(*c, load_member(dir, entry.at("file").get<std::string>()));
    }
    for (const auto& [key, entry] : manifest.at("stage3").items()) {
      auto l = parse_specific_label(key);
      if (!l) throw CorruptModel("manifest names unknown label '" + key + "'");
      m.stage3.emplace(*l, load_member(dir, entry.at("file").get<std::string>()));
    }
    return m;
  } catch (const ModelError&) {
    throw;
  } catch (const std::exception& e) {
    throw CorruptModel(std::string("manifest.json: ") + e.what());
  }
}

}  // namespace enose
