#include "chartkit/cli/cli.hpp"

int main(int argc, char** argv) { return chartkit::cli::run(argc, argv); }
