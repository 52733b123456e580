#include "sigtool_cli.hpp"

int main(int argc, char** argv) { return sigtools::cli::run(argc, argv); }
