#include <stdlib.h>

char *alloc_buf(int n) {
    char *p = malloc(n);
    return p;
}

void release(char *p) {
    free(p);
}

int checker(int *q) {
    *q = 0;
    return q[0];
}

int scale(int x, int d) {
    int v = x / d;
    return v << 2;
}

void fail_fast(int code) {
    exit(code);
}

int main(void) {
    char *buf = alloc_buf(10);
    release(buf);
    free(buf);
    return 0;
}
