#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "labloop/corpus.hpp"
#include "labloop/cursor.hpp"
#include "labloop/text.hpp"

namespace labloop::testing {

inline std::string corpus_dir() { return LABLOOP_CORPUS_DIR; }

inline std::string corpus_file(const std::string& relative) { return read_file(corpus_dir() + "/" + relative); }

inline const Corpus& bundled_corpus() {
  static const Corpus kCorpus = Corpus::load(corpus_dir());
  return kCorpus;
}

// Minimal well-formed navigator reply landing on `cursor`.
inline std::string navigator_reply(StageCursor cursor, const std::string& summary = "Work so far is recorded.") {
  return "Output Summary: " + summary + "\n\nCurrent Stage and Iteration: " + format_cursor(cursor) +
         "\n\nStatus Evaluation: Progress is on track.\n\nTask Choice 1: Run the first option.\n\n"
         "Task Choice 2: Run the second option.\n\nTask Choice 3: Run the third option.\n";
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("labloop-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace labloop::testing
