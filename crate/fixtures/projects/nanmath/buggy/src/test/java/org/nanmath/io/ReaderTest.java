package org.nanmath.io;

import static org.junit.Assert.assertEquals;

import java.io.BufferedReader;
import java.io.IOException;
import java.io.StringReader;
import org.junit.Test;

public class ReaderTest {

    @Test
    public void readsFirstLine() throws IOException {
        BufferedReader reader = new BufferedReader(new StringReader("a\nb"));
        assertEquals("a", reader.readLine());
    }
}
