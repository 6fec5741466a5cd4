#include "leakscope/cli.hpp"

int main(int argc, char** argv) { return leakscope::cli::run_main(argc, argv); }
