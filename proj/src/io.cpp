#include "asnfuzz/io.hpp"

#include <fstream>
#include <sstream>

#include "asnfuzz/errors.hpp"

namespace asnfuzz {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << content;
  if (!out.flush()) throw Error("cannot write " + path);
}

}  // namespace asnfuzz
