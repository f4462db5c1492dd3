#include <cstdio>
int main() { std::printf("vplandau placeholder\n"); return 0; }
