#include "vchain/cli.hpp"

int main(int argc, char** argv) { return vchain::cli::dispatch(argc, argv); }
