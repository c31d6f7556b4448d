package com.parserkit;

import java.util.ArrayList;
import java.util.List;

public class ErrorReporter {
    private final List<String> messages = new ArrayList<String>();

    public void report(int offset, String detail) {
        messages.add(offset+"="+detail);
    }

    public int count() {
        return messages.size();
    }

    public boolean isClean() {
        return messages.isEmpty();
    }
}
