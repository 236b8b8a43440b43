#include "pssim/io.hpp"

int main(int argc, char** argv) { return pssim::io::cli_main(argc, argv); }
