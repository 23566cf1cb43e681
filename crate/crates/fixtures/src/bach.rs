//! Build-tool look-alike: a parent module rooted at `bach/src` with a
//! single root package, and a submodule nested inside its source folder
//! under a layout only the extra `java` pattern recognizes.

use crate::{expect, text, Change, FixtureCommit, FixtureRepo, A2A, IDSD, MO};

const BACH: &str = "bach/src/bach/Bach.java";
const RUNNER: &str = "bach/src/tool/java/bach/tool/Runner.java";
const VERSION_OLD: &str = "bach/src/bach/Version.java";
const VERSION_NEW: &str = "bach/src/tool/java/bach/tool/Version.java";
const DEMO_DESCRIPTOR: &str = "demo/src/main/java/module-info.java";
const DEMO: &str = "demo/src/main/java/demo/Demo.java";

fn bach(stage: u8) -> String {
    let version = if stage >= 2 { "\"1.0\"" } else { "Version.CURRENT" };
    let build = if stage >= 1 {
        "    public void build() {\n        System.out.println(\"build\");\n    }\n"
    } else {
        "    public void build() {\n    }\n"
    };
    format!(
        "package bach;\n\npublic class Bach {{\n    public static String version() {{\n        return {version};\n    }}\n\n{build}}}\n"
    )
}

fn version(package: &str) -> String {
    format!(
        "package {package};\n\npublic final class Version {{\n    public static final String CURRENT = \"1.0\";\n}}\n"
    )
}

fn runner(overload: bool) -> String {
    let mut s = text(
        r#"
package bach.tool;

import bach.Bach;

public class Runner {
    public void run() {
        Bach bach = new Bach();
        bach.build();
    }
"#,
    );
    if overload {
        s.push_str("\n    public void run(String task) {\n        new Bach().build();\n    }\n");
    }
    s.push_str("}\n");
    s
}

pub fn repo() -> FixtureRepo {
    FixtureRepo {
        name: "fx-bach",
        commits: vec![
            FixtureCommit {
                label: "initial-modules",
                message: "Add bach and its tool submodule",
                changes: vec![
                    Change::write("bach/src/module-info.java", "module bach {\n    exports bach;\n}\n"),
                    Change::write(BACH, bach(0)),
                    Change::write(VERSION_OLD, version("bach")),
                    Change::write(
                        "bach/src/tool/java/module-info.java",
                        "module bach.tool {\n    requires bach;\n    exports bach.tool;\n}\n",
                    ),
                    Change::write(RUNNER, runner(false)),
                ],
                expect: expect(true, &[A2A, IDSD, MO], 5, 4, &[8, 10, 11]),
            },
            FixtureCommit {
                label: "log-build",
                message: "Log builds",
                changes: vec![Change::write(BACH, bach(1))],
                expect: expect(false, &[], 1, 0, &[]),
            },
            FixtureCommit {
                label: "demo-module",
                message: "Add a demo module using bach",
                changes: vec![
                    Change::write(
                        DEMO_DESCRIPTOR,
                        "module demo {\n    requires bach;\n    requires bach.tool;\n}\n",
                    ),
                    Change::write(
                        DEMO,
                        text(
                            r#"
package demo;

import bach.Bach;
import bach.tool.Runner;

public class Demo {
    public static void main(String[] args) {
        new Runner().run();
        System.out.println(Bach.version());
    }
}
"#,
                        ),
                    ),
                ],
                expect: expect(true, &[A2A, IDSD, MO], 2, 4, &[]),
            },
            FixtureCommit {
                label: "move-version",
                message: "Move Version into the tool submodule",
                changes: vec![
                    Change::rename(VERSION_OLD, VERSION_NEW, Some(version("bach.tool"))),
                    Change::write(BACH, bach(2)),
                ],
                expect: expect(true, &[A2A], 3, 0, &[11]),
            },
            FixtureCommit {
                label: "run-task",
                message: "Run named tasks",
                changes: vec![Change::write(RUNNER, runner(true))],
                expect: expect(true, &[], 1, 0, &[]),
            },
            FixtureCommit {
                label: "drop-demo",
                message: "Remove the demo module",
                changes: vec![Change::delete(DEMO_DESCRIPTOR), Change::delete(DEMO)],
                expect: expect(true, &[A2A, IDSD, MO], 2, 4, &[]),
            },
        ],
        extra_layouts: vec!["java"],
        aliases: vec![],
        head_paths: 5,
        descriptors: vec![
            ("bach/src/module-info.java", vec!["exports bach"]),
            (
                "bach/src/tool/java/module-info.java",
                vec!["requires bach", "exports bach.tool"],
            ),
        ],
    }
}
