#include "rnego/cli.hpp"

int main(int argc, char** argv) { return rnego::cli_dispatch(argc, argv); }
