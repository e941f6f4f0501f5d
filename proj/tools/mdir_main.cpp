#include "mdir/cli.hpp"

int main(int argc, char** argv) { return mdir::cli_main(argc, argv); }
