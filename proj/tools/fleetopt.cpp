#include "fleetopt/cli.hpp"

int main(int argc, char** argv) { return fleetopt::cli::run(argc, argv); }
