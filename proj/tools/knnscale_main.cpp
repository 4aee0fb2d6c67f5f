#include "knn/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return knn::dispatch(argc, argv, std::cout, std::cerr); }
