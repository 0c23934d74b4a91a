#include "geosep/cli.hpp"

int main(int argc, char** argv) { return geosep::cli_main(argc, argv); }
