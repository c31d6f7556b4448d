package com.parserkit;

import java.util.ArrayList;
import java.util.List;

public class Node {
    protected final List<Node> children = new ArrayList<Node>();

    public void add(Node child) {
        children.add(child);
    }

    public int size() {
        return children.size();
    }
}

class TextNode extends Node {
    private final String text;

    TextNode(String text) {
        this.text = text;
    }
}
