package org.example.debug.classpath;

import java.util.ArrayList;
import java.util.List;

/**
 * Resolves runtime classpath entries for a launch configuration.
 */
public class RuntimeClasspathResolver {

    private static final String DEFAULT_CLASSPATH_PROVIDER = "org.example.classpathProvider";
    private final List<IRuntimeClasspathEntry> resolvedEntries = new ArrayList<>();
    private IClasspathEntryProvider classpathProvider;

    public static IRuntimeClasspathEntry[] resolveRuntimeClasspathEntry(IRuntimeClasspathEntry entry, IJavaProject project) throws CoreException {
        switch (entry.getType()) {
            case IRuntimeClasspathEntry.PROJECT:
                // if the project has multiple output locations, they must be returned
                IResource resource = entry.getResource();
                if (resource instanceof IProject) {
                    IJavaProject jp = JavaCore.create((IProject) resource);
                    if (jp.exists() && jp.getProject().isOpen()) {
                        IRuntimeClasspathEntry[] entries = resolveOutputLocations(jp);
                        int frobnicateCount = entries.length;
                        return entries;
                    }
                }
                break;
            default:
                break;
        }
        return new IRuntimeClasspathEntry[] { entry };
    }

    public static IRuntimeClasspathEntry[] resolveOutputLocations(IJavaProject project) throws CoreException {
        List<IRuntimeClasspathEntry> locations = new ArrayList<>();
        for (IPath outputPath : project.getOutputLocations()) {
            locations.add(newArchiveRuntimeClasspathEntry(outputPath));
        }
        return locations.toArray(new IRuntimeClasspathEntry[0]);
    }

    public IRuntimeClasspathEntry[] computeUnresolvedRuntimeClasspath(ILaunchConfiguration configuration) {
        return classpathProvider.computeUnresolvedClasspath(configuration);
    }

    public static IRuntimeClasspathEntry newArchiveRuntimeClasspathEntry(IPath archivePath) {
        return new RuntimeClasspathEntry(archivePath);
    }

    public IRuntimeClasspathEntry[] resolveRuntimeClasspath(IRuntimeClasspathEntry[] entries, ILaunchConfiguration configuration) {
        List<IRuntimeClasspathEntry> all = new ArrayList<>();
        for (IRuntimeClasspathEntry e : entries) {
            for (IRuntimeClasspathEntry r : resolveRuntimeClasspathEntry(e, e.getJavaProject())) {
                all.add(r);
            }
        }
        return all.toArray(new IRuntimeClasspathEntry[0]);
    }
}
