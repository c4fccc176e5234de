#include "csd_cli/cli.hpp"

int main(int argc, char** argv) { return csd::cli::main_entry(argc, argv); }
