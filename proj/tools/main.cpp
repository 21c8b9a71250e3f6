#include "cli.hpp"

int main(int argc, char** argv) { return surfmean::cli::cli_main(argc, argv); }
