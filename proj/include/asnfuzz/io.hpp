#pragma once

#include <string>

namespace asnfuzz {

// Whole-file helpers; both throw Error with the path in the message.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace asnfuzz
