#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "caproute/matrix.hpp"
#include "caproute/store.hpp"

namespace caproute::testing {

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    auto base = std::filesystem::temp_directory_path() / "caproute_test";
    path_ = base / (std::to_string(::getpid()) + "_" + std::to_string(counter++));
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

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Instruction make_instruction(const std::string& id, const std::string& task,
                                    Split split = Split::train,
                                    const std::string& dataset = "d0") {
  Instruction ins;
  ins.id = id;
  ins.dataset = dataset;
  ins.task_tags = {task};
  ins.text = "text of " + id;
  ins.answer = "answer " + id;
  ins.split = split;
  return ins;
}

/// Matrix from rows of '0'/'1' strings, models named m0..mN, ids i0..iM
/// (width-3 zero padding keeps lexicographic order numeric).
inline CorrectnessMatrix make_matrix(const std::vector<std::string>& rows) {
  std::vector<std::string> models, instructions;
  std::vector<uint8_t> cells;
  char buf[16];
  for (std::size_t m = 0; m < rows.size(); ++m) {
    std::snprintf(buf, sizeof(buf), "m%03zu", m);
    models.push_back(buf);
    for (char c : rows[m]) cells.push_back(c == '1' ? 1 : 0);
  }
  for (std::size_t i = 0; i < rows.at(0).size(); ++i) {
    std::snprintf(buf, sizeof(buf), "i%03zu", i);
    instructions.push_back(buf);
  }
  return CorrectnessMatrix(std::move(models), std::move(instructions), std::move(cells));
}

}  // namespace caproute::testing
