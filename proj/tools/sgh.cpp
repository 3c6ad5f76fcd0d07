#include "sgh/cli.hpp"

int main(int argc, char** argv) { return sgh::cli::run(argc, argv); }
