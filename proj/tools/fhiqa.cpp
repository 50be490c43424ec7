#include "fhiqa/cli/app.hpp"

int main(int argc, char** argv) { return fhiqa::cli::run_cli(std::vector<std::string>(argv, argv + argc)); }
