#include "cli/app.hpp"

int main(int argc, char** argv) { return kmodels::cli::cli_main(argc, argv); }
