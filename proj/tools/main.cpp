#include "spaasim/scenario.hpp"

int main(int argc, char** argv) { return spaasim::cli::run_cli(argc, argv); }
