#include "fixtures.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ordev/front/parser.hpp"

namespace ordev::testkit {

std::string corpus_dir() { return ORDEV_CORPUS_DIR; }
std::string data_dir() { return ORDEV_TEST_DATA_DIR; }
std::string cli_path() { return ORDEV_CLI_PATH; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> corpus_files() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(corpus_dir()))
    if (e.path().extension() == ".osol") out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

front::Contract load_corpus(const std::string& file_name) {
  return front::load_contract(corpus_dir() + "/" + file_name);
}

front::Contract load_data(const std::string& file_name) {
  return front::load_contract(data_dir() + "/" + file_name);
}

}  // namespace ordev::testkit
