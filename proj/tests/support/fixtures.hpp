#pragma once

#include <string>
#include <vector>

#include "ordev/front/ast.hpp"

namespace ordev::testkit {

std::string corpus_dir();
std::string data_dir();
std::string cli_path();
std::string read_file(const std::string& path);

// Full paths of every .osol file in the corpus directory, sorted.
std::vector<std::string> corpus_files();

front::Contract load_corpus(const std::string& file_name);
front::Contract load_data(const std::string& file_name);

}  // namespace ordev::testkit
